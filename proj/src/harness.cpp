#include "aqem/harness.hpp"

#include "aqem/interferometer.hpp"
#include "aqem/parallel.hpp"
#include "aqem/random.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace aqem {

namespace {

// Stream tags under a run seed.
enum : std::uint64_t {
    kTagOptimizer = 1,
    kTagTrainingSet = 2,
    kTagTrainingStream = 3,
    kTagTestSet = 4,
    kTagTestStream = 5,
    kTagBootstrap = 6,
};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double holevo_of_sum(double re, double im, double count) {
    const double s = std::hypot(re, im) / count;
    return s < kUnsharpThreshold ? std::numeric_limits<double>::infinity() : 1.0 / (s * s) - 1.0;
}

}  // namespace

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw std::domain_error("fit_power_law: need at least 3 points");
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto [x, v] = points[i];
        if (!(x > 0.0) || !(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("fit_power_law: N and V_H must be positive and finite");
        design(i, 0) = 1.0;
        design(i, 1) = std::log10(x);
        y(i) = std::log10(v);
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd residual = y - design * coef;
    const double ss_res = residual.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    PowerLawFit fit;
    fit.intercept = coef(0);
    fit.exponent = coef(1);
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

HoldoutStats holevo_with_error(std::span<const std::pair<double, double>> pairs, std::uint64_t seed,
                               int resamples) {
    const auto report = sharpness_and_holevo(pairs);
    HoldoutStats stats;
    stats.holevo_variance = report.holevo_variance;
    stats.sharpness = report.sharpness;

    const std::size_t k = pairs.size();
    std::vector<double> cs(k), sn(k);
    for (std::size_t i = 0; i < k; ++i) {
        cs[i] = std::cos(pairs[i].first - pairs[i].second);
        sn[i] = std::sin(pairs[i].first - pairs[i].second);
    }
    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    int finite = 0;
    for (int b = 0; b < resamples; ++b) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = uniform_index(rng, k);
            re += cs[j];
            im += sn[j];
        }
        const double v = holevo_of_sum(re, im, static_cast<double>(k));
        if (!std::isfinite(v)) continue;
        ++finite;
        const double d = v - mean;
        mean += d / finite;
        m2 += d * (v - mean);
    }
    stats.std_error = finite > 1 ? std::sqrt(m2 / (finite - 1)) : std::numeric_limits<double>::infinity();
    return stats;
}

HoldoutStats evaluate_holdout(const Policy& policy, const SymmetricState& input, std::uint64_t seed,
                              std::size_t count) {
    const auto test = count ? TrainingSet::sample_size(count, derive_seed(seed, {kTagTestSet}))
                            : TrainingSet::sample(input.photons, derive_seed(seed, {kTagTestSet}));
    const auto pairs = run_shots(policy, input, test, derive_seed(seed, {kTagTestStream}));
    return holevo_with_error(pairs, derive_seed(seed, {kTagBootstrap}));
}

TrainingOutcome run_training(const TrainingOptions& options, const DEHooks& hooks,
                             const std::optional<DECheckpoint>& resume) {
    const int n = options.photons;
    if (n < 1) throw std::domain_error("run_training: N must be positive");
    const SymmetricState input = make_input_state(options.state, n);
    const TrainingSet training = TrainingSet::sample(n, derive_seed(options.seed, {kTagTrainingSet}));
    const std::uint64_t stream = derive_seed(options.seed, {kTagTrainingStream});
    const int shots = options.de.shots_per_phi;

    DEConfig de = options.de;
    de.seed = derive_seed(options.seed, {kTagOptimizer});
    const ObjectiveFn fn = [&](const Eigen::VectorXd& x) {
        return objective(Policy(x), input, training, stream, shots);
    };
    const DEResult found = de_optimize(n, 0.0, kTwoPi, de, fn, hooks, resume);

    TrainingOutcome out;
    out.options = options;
    out.policy = Policy(found.best);
    out.train_objective = found.best_objective;
    out.trace = found.trace;
    const auto train_pairs = run_shots(out.policy, input, training, stream, shots);
    out.train = holevo_with_error(train_pairs, derive_seed(options.seed, {kTagBootstrap, 0}));
    out.test = evaluate_holdout(out.policy, input, options.seed);
    return out;
}

PolicyFile policy_file_for(const TrainingOutcome& outcome) {
    PolicyFile f{outcome.policy, {}};
    f.meta.seed = outcome.options.seed;
    f.meta.generations = outcome.options.de.generations;
    f.meta.objective = outcome.train_objective;
    f.meta.state = to_string(outcome.options.state);
    return f;
}

std::string training_report_json(const TrainingOutcome& outcome) {
    const auto& o = outcome.options;
    nlohmann::ordered_json j;
    j["n"] = o.photons;
    j["state"] = to_string(o.state);
    j["seed"] = o.seed;
    j["population"] = o.de.population;
    j["weight"] = o.de.weight;
    j["crossover"] = o.de.crossover;
    j["generations"] = o.de.generations;
    j["shots_per_phi"] = o.de.shots_per_phi;
    j["train_size"] = 10 * o.photons * o.photons;
    j["train_vh"] = outcome.train.holevo_variance;
    j["train_std_err"] = outcome.train.std_error;
    j["test_vh"] = outcome.test.holevo_variance;
    j["test_std_err"] = outcome.test.std_error;
    j["trace"] = outcome.trace;
    return j.dump(2) + "\n";
}

std::string write_training_outputs(const TrainingOutcome& outcome, const std::string& policy_path) {
    write_policy(policy_path, policy_file_for(outcome));
    std::filesystem::path report(policy_path);
    report.replace_extension(".report.json");
    write_file_atomic(report.string(), training_report_json(outcome));
    return report.string();
}

DEConfig scaling_config_for(const ScalingOptions& options, int n) {
    DEConfig c = DEConfig::defaults_for(n);
    if (options.population) c.population = *options.population;
    c.generations = options.generations ? *options.generations : options.gens_per_n * n;
    c.weight = options.weight;
    c.crossover = options.crossover;
    c.workers = 1;
    return c;
}

std::uint64_t scaling_seed_for(const ScalingOptions& options, int n) {
    return derive_seed(options.seed, {static_cast<std::uint64_t>(n)});
}

ScalingResult run_scaling(const ScalingOptions& options) {
    if (options.n_min < 1 || options.n_max < options.n_min)
        throw std::domain_error("run_scaling: invalid N range");
    const int count = options.n_max - options.n_min + 1;
    std::vector<TrainingOutcome> outcomes(count);
    parallel_for(count, options.workers, [&](std::size_t i) {
        const int n = options.n_min + static_cast<int>(i);
        TrainingOptions t;
        t.photons = n;
        t.state = options.state;
        t.seed = scaling_seed_for(options, n);
        t.de = scaling_config_for(options, n);
        outcomes[i] = run_training(t);
    });

    ScalingResult result;
    result.state = options.state;
    std::vector<std::pair<double, double>> points;
    for (const auto& o : outcomes) {
        result.rows.push_back({o.options.photons, o.test.holevo_variance, o.test.std_error});
        result.policies.push_back(o.policy);
        points.emplace_back(o.options.photons, o.test.holevo_variance);
    }
    if (points.size() >= 3) result.fit = fit_power_law(points);
    return result;
}

std::string scaling_csv(const ScalingResult& result) {
    std::string out = "n,v_h,std_err\n";
    for (const auto& r : result.rows)
        out += std::to_string(r.n) + "," + format_double(r.holevo_variance) + "," + format_double(r.std_error) + "\n";
    return out;
}

std::vector<ScalingRow> parse_scaling_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "n,v_h,std_err")
        throw std::runtime_error("scaling csv: missing 'n,v_h,std_err' header");
    std::vector<ScalingRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ScalingRow r;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::runtime_error("scaling csv: malformed row '" + line + "'");
        r.n = std::stoi(line.substr(0, c1));
        r.holevo_variance = std::strtod(line.c_str() + c1 + 1, nullptr);
        r.std_error = std::strtod(line.c_str() + c2 + 1, nullptr);
        rows.push_back(r);
    }
    return rows;
}

std::string scaling_json(const ScalingResult& result, const ScalingOptions& options) {
    nlohmann::ordered_json j;
    j["state"] = to_string(result.state);
    j["n_min"] = options.n_min;
    j["n_max"] = options.n_max;
    j["seed"] = options.seed;
    nlohmann::ordered_json de;
    de["population"] = options.population ? nlohmann::ordered_json(*options.population) : nlohmann::ordered_json(nullptr);
    de["generations"] = options.generations ? nlohmann::ordered_json(*options.generations) : nlohmann::ordered_json(nullptr);
    de["gens_per_n"] = options.gens_per_n;
    de["weight"] = options.weight;
    de["crossover"] = options.crossover;
    j["de"] = std::move(de);
    j["fit"] = {{"exponent", result.fit.exponent}, {"intercept", result.fit.intercept}, {"r2", result.fit.r2}};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : result.rows) {
        nlohmann::ordered_json row;
        row["n"] = r.n;
        row["v_h"] = r.holevo_variance;
        row["std_err"] = r.std_error;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

ScalingResult parse_scaling_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ScalingResult result;
    result.state = parse_state_kind(j.at("state").get<std::string>());
    const auto& fit = j.at("fit");
    result.fit = {fit.at("exponent").get<double>(), fit.at("intercept").get<double>(), fit.at("r2").get<double>()};
    for (const auto& row : j.at("rows"))
        result.rows.push_back({row.at("n").get<int>(), row.at("v_h").get<double>(), row.at("std_err").get<double>()});
    return result;
}

void write_scaling_outputs(const ScalingResult& result, const ScalingOptions& options, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    write_file_atomic((base / "scaling.csv").string(), scaling_csv(result));
    write_file_atomic((base / "scaling.json").string(), scaling_json(result, options));
    for (std::size_t i = 0; i < result.policies.size(); ++i) {
        PolicyFile f{result.policies[i], {}};
        f.meta.seed = scaling_seed_for(options, result.rows[i].n);
        f.meta.generations = scaling_config_for(options, result.rows[i].n).generations;
        f.meta.state = to_string(result.state);
        write_policy((base / "policies" / ("n" + std::to_string(result.rows[i].n) + ".json")).string(), f);
    }
}

}  // namespace aqem
