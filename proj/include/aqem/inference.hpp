#pragma once

// Exact outcome and estimate distributions, circular imprecision statistics,
// classical Fisher information and the Cramer-Rao bound.

#include "aqem/interferometer.hpp"
#include "aqem/policy.hpp"
#include "aqem/symstate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aqem {

/// P(x_N | phi, policy) for every outcome string. Index bit m-1 holds x_m;
/// estimates[i] is the final control phase Phi_N of string i.
struct OutcomeDistribution {
    int photons = 0;
    std::vector<double> probabilities;
    std::vector<double> estimates;

    double total() const;
};

/// Depth-first traversal of the decision tree carrying the unnormalized state;
/// each leaf's probability is the squared norm of the product of Kraus
/// operators along its branch.
OutcomeDistribution outcome_distribution(const SymmetricState& state, const Policy& policy, double phi);

struct EstimatePoint {
    double estimate;
    double probability;
};

struct EstimateDistribution {
    std::vector<EstimatePoint> support;  // sorted by estimate
    double true_phi = 0.0;

    double total() const;
};

inline constexpr double kEstimateMergeTolerance = 1e-12;

/// Sums outcome probabilities over each preimage set of the estimator.
EstimateDistribution group_estimates(const OutcomeDistribution& outcomes, double phi);

EstimateDistribution estimate_distribution(const SymmetricState& state, const Policy& policy, double phi);

inline constexpr double kUnsharpThreshold = 1e-12;

struct ImprecisionReport {
    double sharpness = 0.0;
    double holevo_variance = 0.0;  // infinite when unsharp
    double circular_mean = 0.0;    // arg of the mean of e^{i(phi_k - estimate_k)}
    std::optional<double> bias;    // |circular_mean|, only when every phi_k is equal
    std::size_t sample_count = 0;
    bool unsharp = false;
};

/// S = |sum_k e^{i(phi_k - estimate_k)} / K|, V_H = S^-2 - 1.
ImprecisionReport sharpness_and_holevo(std::span<const std::pair<double, double>> pairs);

/// Same statistics from an exact estimate distribution.
ImprecisionReport sharpness_and_holevo(const EstimateDistribution& dist);

/// sum P(est) (est - phi)^2 with the error wrapped into (-pi, pi].
double plain_variance(const EstimateDistribution& dist);

struct FisherReport {
    int photons = 0;
    double phi = 0.0;
    double step = 0.0;
    double fisher = 0.0;
    double excluded_mass = 0.0;
    bool warning = false;  // excluded mass above kFisherExcludedMassWarning
};

inline constexpr double kFisherDefaultStep = 1e-5;
inline constexpr double kFisherBranchFloor = 1e-12;
inline constexpr double kFisherExcludedMassWarning = 1e-6;

/// F = sum_x P (d log P / d phi)^2 with dP/dphi from central differences.
/// Branches with P < 1e-12 are skipped and their mass reported.
FisherReport fisher_information(const SymmetricState& state, const Policy& policy, double phi,
                                double step = kFisherDefaultStep);

/// 1 / sqrt(F).
double crlb(double fisher);

std::string fisher_report_to_json(const FisherReport& report);

}  // namespace aqem
