#pragma once

// Differential evolution (rand/1/bin) on the torus [lo, hi)^dim, and the
// Holevo-variance objective for feedback policies.

#include "aqem/policy.hpp"
#include "aqem/symstate.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aqem {

struct DEConfig {
    int population = 40;
    double weight = 0.7;     // F
    double crossover = 0.9;  // CR
    int generations = 100;
    std::uint64_t seed = 0;
    int shots_per_phi = 1;
    int workers = 1;  // does not affect results

    /// Defaults scaled to a policy of dimension n.
    static DEConfig defaults_for(int n);
    void validate() const;
};

/// K = 10 N^2 phases drawn uniformly from [0, 2pi).
struct TrainingSet {
    std::vector<double> phis;
    std::uint64_t seed = 0;

    static TrainingSet sample(int photons, std::uint64_t seed);
    static TrainingSet sample_size(std::size_t count, std::uint64_t seed);
};

/// Returned in place of V_H when the estimates are unsharp (S ~ 0).
inline constexpr double kUnsharpObjective = 1e12;

/// Estimates from shots_per_phi single-shot runs per training phase, in
/// training order. Uses one random stream seeded with stream_seed.
std::vector<std::pair<double, double>> run_shots(const Policy& policy, const SymmetricState& input,
                                                 const TrainingSet& training, std::uint64_t stream_seed,
                                                 int shots_per_phi = 1);

/// Holevo variance over the training set; kUnsharpObjective when unsharp.
/// Deterministic in (policy, training, stream_seed).
double objective(const Policy& policy, const SymmetricState& input, const TrainingSet& training,
                 std::uint64_t stream_seed, int shots_per_phi = 1);

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Resumable optimizer state, taken at the end of a generation.
struct DECheckpoint {
    DEConfig config;
    int generation = 0;          // generations completed
    Eigen::MatrixXd population;  // one candidate per column
    Eigen::VectorXd objectives;
    std::vector<double> trace;

    std::string to_json() const;
    static DECheckpoint from_json(const std::string& text);
};

struct DEResult {
    Eigen::VectorXd best;
    double best_objective = 0.0;
    std::vector<double> trace;  // best objective after each generation
};

struct DEHooks {
    std::function<void(const DECheckpoint&)> on_generation;
};

/// DE/rand/1/bin. Mutant a + F (b - c) from three distinct members other than
/// the target, binomial crossover with one forced coordinate, periodic wrap
/// into [lo, hi), greedy selection. All randomness for member i in
/// generation g comes from a stream derived from (seed, g, i), so the result
/// does not depend on config.workers.
DEResult de_optimize(int dim, double lo, double hi, const DEConfig& config, const ObjectiveFn& objective,
                     const DEHooks& hooks = {}, const std::optional<DECheckpoint>& resume = std::nullopt);

}  // namespace aqem
