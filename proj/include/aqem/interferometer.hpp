#pragma once

// Mach-Zehnder passage of one photon at a time, as Kraus operators on the
// symmetric state, and single-shot adaptive runs.
//
// Conventions:
//   beamsplitter  B = (1/sqrt 2) [[1, i], [i, 1]]
//   single photon V = B diag(e^{i phi}, e^{i Phi}) B, columns = input mode (a, b),
//                 rows = output port x in {0, 1}
// so a photon entering mode a exits at x = 1 with probability cos^2((phi-Phi)/2)
// and x = 1 is the certain port when phi = Phi.

#include "aqem/policy.hpp"
#include "aqem/random.hpp"
#include "aqem/symstate.hpp"

#include <Eigen/Core>

#include <complex>
#include <stdexcept>
#include <vector>

namespace aqem {

struct PhasePair {
    double unknown;  // phi
    double control;  // Phi

    PhasePair(double phi, double big_phi) : unknown(wrap_angle(phi)), control(wrap_angle(big_phi)) {}
};

template <typename Real>
using Matrix2c = Eigen::Matrix<std::complex<Real>, 2, 2>;

template <typename Real = double>
Matrix2c<Real> single_photon_matrix(Real phi, Real big_phi) {
    using C = std::complex<Real>;
    const C i(0, 1);
    const Real s = Real(1) / std::sqrt(Real(2));
    Matrix2c<Real> bs;
    bs << s, i * s, i * s, s;
    Matrix2c<Real> phases = Matrix2c<Real>::Zero();
    phases(0, 0) = std::polar(Real(1), phi);
    phases(1, 1) = std::polar(Real(1), big_phi);
    return bs * phases * bs;
}

inline Matrix2c<double> single_photon_matrix(const PhasePair& p) {
    return single_photon_matrix<double>(p.unknown, p.control);
}

/// Unnormalized K_x psi: one photon leaves the symmetric state, passes V and
/// lands in port x,
///   (K_x psi)_n = sqrt((n+1)/R) V(x,a) psi_{n+1} + sqrt((R-n)/R) V(x,b) psi_n.
template <typename Real>
BasicSymmetricState<Real> kraus_apply(const BasicSymmetricState<Real>& state, int outcome,
                                      const Matrix2c<Real>& v) {
    const int r = state.photons;
    if (r < 1) throw std::domain_error("kraus_apply: state has no photons left");
    if (outcome != 0 && outcome != 1) throw std::domain_error("kraus_apply: outcome must be 0 or 1");
    const std::complex<Real> va = v(outcome, 0);
    const std::complex<Real> vb = v(outcome, 1);
    ComplexVector<Real> out(r);
    for (int n = 0; n < r; ++n) {
        out(n) = std::sqrt(Real(n + 1) / Real(r)) * va * state.amps(n + 1) +
                 std::sqrt(Real(r - n) / Real(r)) * vb * state.amps(n);
    }
    return {r - 1, std::move(out)};
}

inline SymmetricState kraus_apply(const SymmetricState& state, int outcome, const PhasePair& p) {
    return kraus_apply<double>(state, outcome, single_photon_matrix(p));
}

/// Branch probabilities below this are treated as exactly zero.
inline constexpr double kMinBranchProbability = 1e-300;

class DegenerateBranchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MeasurementRecord {
    int outcome;
    double probability;
    SymmetricState post_state;
};

/// Detect one photon. x = 0 if u < P(0), else 1.
MeasurementRecord measure_one(const SymmetricState& state, const PhasePair& p, double u);

struct ShotResult {
    double estimate;
    OutcomeHistory history;
};

/// One adaptive run: N detections with Phi_0 = 0, Phi updated after each
/// outcome; the estimate is Phi_N.
ShotResult simulate_single_shot(const SymmetricState& state, const Policy& policy, double phi, Rng& rng);

/// Allocation-free single-shot runner for inner loops. Produces the same
/// estimate as simulate_single_shot for the same random stream.
class ShotSimulator {
public:
    explicit ShotSimulator(const SymmetricState& input);

    double run(const Policy& policy, double phi, Rng& rng);

private:
    SymmetricState input_;
    std::vector<std::complex<double>> a_, b_;
    std::vector<double> sqrt_int_;
};

}  // namespace aqem
