#include "aqem/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aqem {

namespace {

using cd = std::complex<double>;

// Up to the global phase i e^{i(phi+Phi)/2}, V is the real matrix
// [[s, c], [c, -s]] with s = sin((phi-Phi)/2), c = cos((phi-Phi)/2).
struct RealRow {
    double a, b;  // V(x, a), V(x, b) without the global phase
};

struct HalfAngle {
    double s, c;
    HalfAngle(double phi, double control)
        : s(std::sin(0.5 * (phi - control))), c(std::cos(0.5 * (phi - control))) {}
    RealRow row(int x) const { return x == 0 ? RealRow{s, c} : RealRow{c, -s}; }
};

// out[n] = (sqrt(n+1) ra in[n+1] + sqrt(r-n) rb in[n]) / sqrt(r) for n in
// [lo, hi]; returns |out|^2. measure_one and ShotSimulator share this so the
// two paths agree to the last bit.
double apply_kraus(const cd* in, int r, RealRow row, const double* sqrt_int, cd* out, int lo, int hi) {
    const double scale = 1.0 / sqrt_int[r];
    const double sa = row.a * scale;
    const double sb = row.b * scale;
    double norm2 = 0.0;
    for (int n = lo; n <= hi; ++n) {
        const cd v = (sqrt_int[n + 1] * sa) * in[n + 1] + (sqrt_int[r - n] * sb) * in[n];
        out[n] = v;
        norm2 += std::norm(v);
    }
    return norm2;
}

// Nonzero amplitudes of the input occupy [lo, hi]; after one detection they
// occupy [max(lo-1, 0), min(hi, r-1)].
struct Support {
    int lo, hi;
    Support shrink(int r) const { return {std::max(lo - 1, 0), std::min(hi, r - 1)}; }
};

Support support_of(const cd* amps, int size) {
    int lo = 0, hi = size - 1;
    while (lo < hi && amps[lo] == cd(0.0, 0.0)) ++lo;
    while (hi > lo && amps[hi] == cd(0.0, 0.0)) --hi;
    return {lo, hi};
}

std::vector<double> sqrt_table(int n) {
    std::vector<double> t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = std::sqrt(static_cast<double>(k));
    return t;
}

void check_branch(double p, int outcome) {
    if (!(p >= kMinBranchProbability))
        throw DegenerateBranchError("measurement branch x=" + std::to_string(outcome) +
                                    " has zero probability and cannot be normalized");
}

}  // namespace

MeasurementRecord measure_one(const SymmetricState& state, const PhasePair& p, double u) {
    const int r = state.photons;
    if (r < 1) throw std::domain_error("measure_one: state has no photons left");
    const auto roots = sqrt_table(r);
    const HalfAngle half(p.unknown, p.control);

    const Support out = support_of(state.amps.data(), r + 1).shrink(r);
    ComplexVector<double> k0 = ComplexVector<double>::Zero(r), k1 = ComplexVector<double>::Zero(r);
    const double p0 = apply_kraus(state.amps.data(), r, half.row(0), roots.data(), k0.data(), out.lo, out.hi);
    const double p1 = apply_kraus(state.amps.data(), r, half.row(1), roots.data(), k1.data(), out.lo, out.hi);

    const int x = u < p0 ? 0 : 1;
    const double px = x == 0 ? p0 : p1;
    check_branch(px, x);
    ComplexVector<double>& chosen = x == 0 ? k0 : k1;
    // restore the global phase so post_state is exactly K_x psi / |K_x psi|
    const std::complex<double> global = std::complex<double>(0.0, 1.0) *
                                        std::polar(1.0, 0.5 * (p.unknown + p.control));
    chosen *= global / std::sqrt(px);
    return {x, px, SymmetricState(r - 1, std::move(chosen))};
}

ShotResult simulate_single_shot(const SymmetricState& state, const Policy& policy, double phi, Rng& rng) {
    if (policy.size() != state.photons)
        throw std::domain_error("simulate_single_shot: policy length " + std::to_string(policy.size()) +
                                " does not match photon count " + std::to_string(state.photons));
    ShotResult result{0.0, {}};
    auto& h = result.history;
    h.outcomes.reserve(policy.size());
    h.phases.reserve(policy.size() + 1);
    SymmetricState current = state;
    for (int m = 0; m < policy.size(); ++m) {
        const double u = uniform01(rng);
        auto rec = measure_one(current, PhasePair(phi, h.phases.back()), u);
        h.outcomes.push_back(rec.outcome);
        h.phases.push_back(feedback_update(h.phases.back(), rec.outcome, policy[m]));
        current = std::move(rec.post_state);
    }
    result.estimate = h.phases.back();
    return result;
}

ShotSimulator::ShotSimulator(const SymmetricState& input)
    : input_(input),
      a_(input.photons + 1),
      b_(input.photons + 1),
      sqrt_int_(sqrt_table(input.photons)) {}

double ShotSimulator::run(const Policy& policy, double phi, Rng& rng) {
    const int n = input_.photons;
    if (policy.size() != n)
        throw std::domain_error("ShotSimulator: policy length does not match photon count");
    std::copy(input_.amps.data(), input_.amps.data() + n + 1, a_.begin());
    Support support = support_of(a_.data(), n + 1);
    cd* cur = a_.data();
    cd* next = b_.data();
    const double unknown = wrap_angle(phi);
    double control = 0.0;
    for (int m = 0; m < n; ++m) {
        const int r = n - m;
        const double u = uniform01(rng);
        const HalfAngle half(unknown, control);
        support = support.shrink(r);
        int x = 0;
        double px = apply_kraus(cur, r, half.row(0), sqrt_int_.data(), next, support.lo, support.hi);
        if (!(u < px)) {
            x = 1;
            px = apply_kraus(cur, r, half.row(1), sqrt_int_.data(), next, support.lo, support.hi);
        }
        check_branch(px, x);
        const double inv = 1.0 / std::sqrt(px);
        for (int k = support.lo; k <= support.hi; ++k) next[k] *= inv;
        // the next step reads one slot past each end of the support
        if (support.lo > 0) next[support.lo - 1] = 0.0;
        if (support.hi + 1 < r) next[support.hi + 1] = 0.0;
        std::swap(cur, next);
        control = feedback_update(control, x, policy[m]);
    }
    return control;
}

}  // namespace aqem
