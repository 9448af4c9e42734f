#include "aqem/inference.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>

namespace aqem {

namespace {

void require_enumerable(int photons, const char* what) {
    if (photons > kMaxEnumerablePhotons)
        throw std::length_error(std::string(what) + ": N = " + std::to_string(photons) +
                                " exceeds the exact-enumeration limit of " +
                                std::to_string(kMaxEnumerablePhotons));
}

ImprecisionReport report_from_sum(std::complex<double> mean, std::size_t count, bool single_phi) {
    ImprecisionReport r;
    r.sample_count = count;
    r.sharpness = std::min(1.0, std::abs(mean));
    r.circular_mean = std::arg(mean);
    if (r.sharpness < kUnsharpThreshold) {
        r.unsharp = true;
        r.holevo_variance = std::numeric_limits<double>::infinity();
    } else {
        r.holevo_variance = 1.0 / (r.sharpness * r.sharpness) - 1.0;
    }
    if (single_phi) r.bias = std::abs(r.circular_mean);
    return r;
}

}  // namespace

double OutcomeDistribution::total() const {
    return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double EstimateDistribution::total() const {
    double s = 0.0;
    for (const auto& p : support) s += p.probability;
    return s;
}

OutcomeDistribution outcome_distribution(const SymmetricState& state, const Policy& policy, double phi) {
    const int n = state.photons;
    require_enumerable(n, "outcome_distribution");
    if (policy.size() != n)
        throw std::domain_error("outcome_distribution: policy length does not match photon count");

    const std::size_t leaves = std::size_t{1} << n;
    OutcomeDistribution out;
    out.photons = n;
    out.probabilities.assign(leaves, 0.0);
    out.estimates.assign(leaves, 0.0);

    // levels[m] holds the unnormalized state after m detections
    std::vector<SymmetricState> levels(n + 1);
    levels[0] = state;

    std::function<void(int, double, std::uint64_t)> descend = [&](int m, double control,
                                                                   std::uint64_t bits) {
        if (m == n) {
            out.probabilities[bits] = std::norm(levels[n].amps(0));
            out.estimates[bits] = control;
            return;
        }
        const auto v = single_photon_matrix(PhasePair(phi, control));
        for (int x = 0; x <= 1; ++x) {
            levels[m + 1] = kraus_apply<double>(levels[m], x, v);
            descend(m + 1, feedback_update(control, x, policy[m]),
                    bits | (static_cast<std::uint64_t>(x) << m));
        }
    };
    descend(0, 0.0, 0);
    return out;
}

EstimateDistribution group_estimates(const OutcomeDistribution& outcomes, double phi) {
    std::vector<EstimatePoint> pts(outcomes.probabilities.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {outcomes.estimates[i], outcomes.probabilities[i]};
    std::sort(pts.begin(), pts.end(),
              [](const EstimatePoint& a, const EstimatePoint& b) { return a.estimate < b.estimate; });

    EstimateDistribution dist;
    dist.true_phi = wrap_angle(phi);
    for (const auto& p : pts) {
        if (!dist.support.empty() &&
            p.estimate - dist.support.back().estimate <= kEstimateMergeTolerance) {
            dist.support.back().probability += p.probability;
        } else {
            dist.support.push_back(p);
        }
    }
    // Values just below 2pi belong with those at 0.
    if (dist.support.size() > 1 &&
        dist.support.front().estimate + kTwoPi - dist.support.back().estimate <= kEstimateMergeTolerance) {
        dist.support.front().probability += dist.support.back().probability;
        dist.support.pop_back();
    }
    return dist;
}

EstimateDistribution estimate_distribution(const SymmetricState& state, const Policy& policy, double phi) {
    return group_estimates(outcome_distribution(state, policy, phi), phi);
}

ImprecisionReport sharpness_and_holevo(std::span<const std::pair<double, double>> pairs) {
    if (pairs.empty()) throw std::domain_error("sharpness_and_holevo: no samples");
    std::complex<double> sum(0.0, 0.0);
    bool single_phi = true;
    for (const auto& [phi, est] : pairs) {
        sum += std::polar(1.0, phi - est);
        single_phi = single_phi && wrap_angle(phi) == wrap_angle(pairs.front().first);
    }
    return report_from_sum(sum / static_cast<double>(pairs.size()), pairs.size(), single_phi);
}

ImprecisionReport sharpness_and_holevo(const EstimateDistribution& dist) {
    if (dist.support.empty()) throw std::domain_error("sharpness_and_holevo: empty distribution");
    std::complex<double> sum(0.0, 0.0);
    for (const auto& p : dist.support) sum += p.probability * std::polar(1.0, dist.true_phi - p.estimate);
    return report_from_sum(sum, dist.support.size(), true);
}

double plain_variance(const EstimateDistribution& dist) {
    double v = 0.0;
    for (const auto& p : dist.support) {
        const double e = wrap_signed(p.estimate - dist.true_phi);
        v += p.probability * e * e;
    }
    return v;
}

FisherReport fisher_information(const SymmetricState& state, const Policy& policy, double phi, double step) {
    if (!(step >= 1e-6 && step <= 1e-3))
        throw std::domain_error("fisher_information: step must lie in [1e-6, 1e-3]");
    const auto centre = outcome_distribution(state, policy, phi);
    const auto plus = outcome_distribution(state, policy, phi + step);
    const auto minus = outcome_distribution(state, policy, phi - step);

    FisherReport r;
    r.photons = state.photons;
    r.phi = phi;
    r.step = step;
    for (std::size_t i = 0; i < centre.probabilities.size(); ++i) {
        const double p = centre.probabilities[i];
        if (p < kFisherBranchFloor) {
            r.excluded_mass += p;
            continue;
        }
        const double dp = (plus.probabilities[i] - minus.probabilities[i]) / (2.0 * step);
        r.fisher += dp * dp / p;
    }
    r.warning = r.excluded_mass > kFisherExcludedMassWarning;
    return r;
}

double crlb(double fisher) {
    if (!(fisher > 0.0)) throw std::domain_error("crlb: Fisher information must be positive");
    return 1.0 / std::sqrt(fisher);
}

std::string fisher_report_to_json(const FisherReport& report) {
    nlohmann::ordered_json j;
    j["n"] = report.photons;
    j["phi"] = report.phi;
    j["fisher"] = report.fisher;
    if (report.fisher > 0.0)
        j["crlb"] = crlb(report.fisher);
    else
        j["crlb"] = nullptr;
    j["excluded_mass"] = report.excluded_mass;
    j["h"] = report.step;
    return j.dump(2) + "\n";
}

}  // namespace aqem
