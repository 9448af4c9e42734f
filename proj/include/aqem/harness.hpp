#pragma once

// Training runs, held-out evaluation, N sweeps with power-law fits, and the
// files they produce.

#include "aqem/inference.hpp"
#include "aqem/optimizer.hpp"
#include "aqem/policy.hpp"
#include "aqem/symstate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aqem {

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0;  // log10 prefactor
    double r2 = 0.0;
};

/// Ordinary least squares of log10(V) on log10(N).
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

inline constexpr int kBootstrapResamples = 200;

struct HoldoutStats {
    double holevo_variance = 0.0;
    double std_error = 0.0;  // bootstrap over the sampled pairs
    double sharpness = 0.0;
};

/// V_H of (phi, estimate) pairs with a bootstrap standard error.
HoldoutStats holevo_with_error(std::span<const std::pair<double, double>> pairs, std::uint64_t seed,
                               int resamples = kBootstrapResamples);

/// Fresh phases (K = count, or 10 N^2 when count is 0), one shot each.
HoldoutStats evaluate_holdout(const Policy& policy, const SymmetricState& input, std::uint64_t seed,
                              std::size_t count = 0);

struct TrainingOptions {
    int photons = 4;
    StateKind state = StateKind::sine;
    std::uint64_t seed = 1;
    DEConfig de;  // de.seed is ignored; derived from `seed`
};

struct TrainingOutcome {
    TrainingOptions options;
    Policy policy;
    double train_objective = 0.0;
    HoldoutStats train;
    HoldoutStats test;
    std::vector<double> trace;
};

/// Training set of 10 N^2 phases, DE over [0, 2pi)^N, then evaluation on a
/// held-out set of the same size. Fully determined by options.seed.
TrainingOutcome run_training(const TrainingOptions& options, const DEHooks& hooks = {},
                             const std::optional<DECheckpoint>& resume = std::nullopt);

PolicyFile policy_file_for(const TrainingOutcome& outcome);
std::string training_report_json(const TrainingOutcome& outcome);

/// Writes the policy to `policy_path` and the report next to it
/// (<stem>.report.json). Returns the report path.
std::string write_training_outputs(const TrainingOutcome& outcome, const std::string& policy_path);

struct ScalingRow {
    int n = 0;
    double holevo_variance = 0.0;
    double std_error = 0.0;
};

struct ScalingResult {
    StateKind state = StateKind::sine;
    std::vector<ScalingRow> rows;  // sorted by n
    PowerLawFit fit;
    std::vector<Policy> policies;  // parallel to rows; empty when loaded from CSV
};

struct ScalingOptions {
    int n_min = 4;
    int n_max = 16;
    StateKind state = StateKind::sine;
    std::uint64_t seed = 1;
    std::optional<int> population;   // default max(40, 4N)
    std::optional<int> generations;  // default gens_per_n * N
    int gens_per_n = 100;
    double weight = 0.7;
    double crossover = 0.9;
    int workers = 1;  // per-N jobs in parallel
};

DEConfig scaling_config_for(const ScalingOptions& options, int n);
std::uint64_t scaling_seed_for(const ScalingOptions& options, int n);

ScalingResult run_scaling(const ScalingOptions& options);

std::string scaling_csv(const ScalingResult& result);
std::vector<ScalingRow> parse_scaling_csv(const std::string& text);
std::string scaling_json(const ScalingResult& result, const ScalingOptions& options);
/// State, rows and fit back from scaling_json output (policies are not stored there).
ScalingResult parse_scaling_json(const std::string& text);

/// Writes <dir>/scaling.csv, <dir>/scaling.json and <dir>/policies/n<N>.json.
void write_scaling_outputs(const ScalingResult& result, const ScalingOptions& options, const std::string& dir);

}  // namespace aqem
