#include "aqem/optimizer.hpp"

#include "aqem/interferometer.hpp"
#include "aqem/parallel.hpp"
#include "aqem/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace aqem {

namespace {

constexpr std::uint64_t kInitTag = 0x1ec0de5eedULL;

double sanitize(double f) { return std::isfinite(f) ? f : std::numeric_limits<double>::max(); }

double wrap_into(double x, double lo, double hi) {
    const double width = hi - lo;
    double r = std::fmod(x - lo, width);
    if (r < 0) r += width;
    if (r >= width) r = 0.0;
    return lo + r;
}

nlohmann::ordered_json config_to_json(const DEConfig& c) {
    nlohmann::ordered_json j;
    j["population"] = c.population;
    j["weight"] = c.weight;
    j["crossover"] = c.crossover;
    j["generations"] = c.generations;
    j["seed"] = c.seed;
    j["shots_per_phi"] = c.shots_per_phi;
    return j;
}

DEConfig config_from_json(const nlohmann::json& j) {
    DEConfig c;
    c.population = j.at("population").get<int>();
    c.weight = j.at("weight").get<double>();
    c.crossover = j.at("crossover").get<double>();
    c.generations = j.at("generations").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.shots_per_phi = j.value("shots_per_phi", 1);
    return c;
}

}  // namespace

DEConfig DEConfig::defaults_for(int n) {
    DEConfig c;
    c.population = std::max(40, 4 * n);
    c.generations = 100 * n;
    return c;
}

void DEConfig::validate() const {
    if (population < 4) throw std::domain_error("DEConfig: population must be at least 4");
    if (!(weight > 0.0 && weight <= 2.0)) throw std::domain_error("DEConfig: weight F must lie in (0, 2]");
    if (!(crossover >= 0.0 && crossover <= 1.0)) throw std::domain_error("DEConfig: crossover CR must lie in [0, 1]");
    if (generations < 1) throw std::domain_error("DEConfig: generations must be at least 1");
    if (shots_per_phi < 1) throw std::domain_error("DEConfig: shots_per_phi must be at least 1");
}

TrainingSet TrainingSet::sample(int photons, std::uint64_t seed) {
    if (photons < 1) throw std::domain_error("TrainingSet: N must be positive");
    return sample_size(10 * static_cast<std::size_t>(photons) * photons, seed);
}

TrainingSet TrainingSet::sample_size(std::size_t count, std::uint64_t seed) {
    TrainingSet t;
    t.seed = seed;
    t.phis.resize(count);
    Rng rng(seed);
    for (auto& phi : t.phis) phi = wrap_angle(kTwoPi * uniform01(rng));
    return t;
}

std::vector<std::pair<double, double>> run_shots(const Policy& policy, const SymmetricState& input,
                                                 const TrainingSet& training, std::uint64_t stream_seed,
                                                 int shots_per_phi) {
    if (policy.size() != input.photons)
        throw std::domain_error("objective: policy length does not match photon count");
    ShotSimulator sim(input);
    Rng rng(stream_seed);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(training.phis.size() * shots_per_phi);
    for (double phi : training.phis)
        for (int s = 0; s < shots_per_phi; ++s) pairs.emplace_back(phi, sim.run(policy, phi, rng));
    return pairs;
}

double objective(const Policy& policy, const SymmetricState& input, const TrainingSet& training,
                 std::uint64_t stream_seed, int shots_per_phi) {
    if (training.phis.empty()) throw std::domain_error("objective: empty training set");
    ShotSimulator sim(input);
    Rng rng(stream_seed);
    double re = 0.0, im = 0.0;
    for (double phi : training.phis) {
        for (int s = 0; s < shots_per_phi; ++s) {
            const double err = phi - sim.run(policy, phi, rng);
            re += std::cos(err);
            im += std::sin(err);
        }
    }
    const double k = static_cast<double>(training.phis.size()) * shots_per_phi;
    const double sharpness = std::hypot(re, im) / k;
    if (sharpness < 1e-12) return kUnsharpObjective;
    return 1.0 / (sharpness * sharpness) - 1.0;
}

std::string DECheckpoint::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(config);
    j["generation"] = generation;
    auto pop = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < population.cols(); ++i) {
        auto col = nlohmann::ordered_json::array();
        for (Eigen::Index k = 0; k < population.rows(); ++k) col.push_back(population(k, i));
        pop.push_back(std::move(col));
    }
    j["population"] = std::move(pop);
    j["objectives"] = std::vector<double>(objectives.data(), objectives.data() + objectives.size());
    j["trace"] = trace;
    return j.dump() + "\n";
}

DECheckpoint DECheckpoint::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    DECheckpoint c;
    c.config = config_from_json(j.at("config"));
    c.generation = j.at("generation").get<int>();
    const auto& pop = j.at("population");
    const Eigen::Index members = static_cast<Eigen::Index>(pop.size());
    const Eigen::Index dim = members ? static_cast<Eigen::Index>(pop[0].size()) : 0;
    c.population.resize(dim, members);
    for (Eigen::Index i = 0; i < members; ++i) {
        if (static_cast<Eigen::Index>(pop[i].size()) != dim)
            throw std::runtime_error("checkpoint: ragged population matrix");
        for (Eigen::Index k = 0; k < dim; ++k) c.population(k, i) = pop[i][k].get<double>();
    }
    const auto obj = j.at("objectives").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(obj.size()) != members)
        throw std::runtime_error("checkpoint: objective vector does not match population");
    c.objectives = Eigen::Map<const Eigen::VectorXd>(obj.data(), members);
    c.trace = j.at("trace").get<std::vector<double>>();
    return c;
}

DEResult de_optimize(int dim, double lo, double hi, const DEConfig& config, const ObjectiveFn& objective,
                     const DEHooks& hooks, const std::optional<DECheckpoint>& resume) {
    config.validate();
    if (dim < 1) throw std::domain_error("de_optimize: dimension must be positive");
    if (!(hi > lo)) throw std::domain_error("de_optimize: empty search box");

    const int np = config.population;
    Eigen::MatrixXd pop(dim, np);
    Eigen::VectorXd fit(np);
    std::vector<double> trace;
    int start = 0;

    if (resume) {
        if (resume->population.rows() != dim || resume->population.cols() != np ||
            resume->objectives.size() != np)
            throw std::domain_error("de_optimize: checkpoint does not match dimension/population");
        pop = resume->population;
        fit = resume->objectives;
        trace = resume->trace;
        start = resume->generation;
    } else {
        for (int i = 0; i < np; ++i) {
            Rng rng(derive_seed(config.seed, {kInitTag, static_cast<std::uint64_t>(i)}));
            for (int k = 0; k < dim; ++k) pop(k, i) = wrap_into(lo + (hi - lo) * uniform01(rng), lo, hi);
        }
        parallel_for(np, config.workers, [&](std::size_t i) { fit(i) = sanitize(objective(pop.col(i))); });
    }

    Eigen::MatrixXd trials(dim, np);
    Eigen::VectorXd trial_fit(np);
    for (int g = start; g < config.generations; ++g) {
        parallel_for(np, config.workers, [&](std::size_t idx) {
            const int i = static_cast<int>(idx);
            Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(g), idx}));
            int a, b, c;
            do a = static_cast<int>(uniform_index(rng, np)); while (a == i);
            do b = static_cast<int>(uniform_index(rng, np)); while (b == i || b == a);
            do c = static_cast<int>(uniform_index(rng, np)); while (c == i || c == a || c == b);
            const int forced = static_cast<int>(uniform_index(rng, dim));
            auto trial = trials.col(i);
            for (int k = 0; k < dim; ++k) {
                const bool take = k == forced || uniform01(rng) < config.crossover;
                const double mutant = pop(k, a) + config.weight * (pop(k, b) - pop(k, c));
                trial(k) = take ? wrap_into(mutant, lo, hi) : pop(k, i);
            }
            trial_fit(i) = sanitize(objective(trial));
        });
        for (int i = 0; i < np; ++i) {
            if (trial_fit(i) <= fit(i)) {
                pop.col(i) = trials.col(i);
                fit(i) = trial_fit(i);
            }
        }
        trace.push_back(fit.minCoeff());
        if (hooks.on_generation) hooks.on_generation(DECheckpoint{config, g + 1, pop, fit, trace});
    }

    Eigen::Index best;
    const double best_value = fit.minCoeff(&best);
    return {pop.col(best), best_value, trace};
}

}  // namespace aqem
