// aqem: train, evaluate and analyse adaptive phase-estimation policies.
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure, 1 other (I/O).

#include "aqem/harness.hpp"
#include "aqem/inference.hpp"
#include "aqem/interferometer.hpp"
#include "aqem/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

aqem::StateKind state_for(const aqem::PolicyFile& file, const std::string& override_state) {
    if (!override_state.empty()) return aqem::parse_state_kind(override_state);
    if (file.meta.state) return aqem::parse_state_kind(*file.meta.state);
    throw CLI::ValidationError("--state", "policy file has no meta.state; pass --state");
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        aqem::write_file_atomic(out_path, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive interferometric phase estimation: policy learning and bounds"};
    app.set_config("--config", "", "TOML/INI file with option defaults (flags take precedence)");
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Learn a feedback policy by differential evolution");
    int train_n = 0;
    std::string train_state = "sine";
    std::uint64_t train_seed = 1;
    std::optional<int> pop, gens;
    double weight = 0.7, cr = 0.9;
    int shots = 1, workers = 1;
    std::string train_out, checkpoint, resume;
    train->add_option("--n", train_n, "Number of photons")->required()->check(CLI::Range(1, 1000));
    train->add_option("--state", train_state, "Input state")->check(CLI::IsMember({"sine", "product"}));
    train->add_option("--seed", train_seed, "Run seed");
    train->add_option("--pop", pop, "Population size (default max(40, 4N))");
    train->add_option("--weight", weight, "Differential weight F");
    train->add_option("--cr", cr, "Crossover rate CR");
    train->add_option("--gens", gens, "Generations (default 100 N)");
    train->add_option("--shots", shots, "Shots per training phase");
    train->add_option("--workers", workers, "Threads for objective evaluation");
    train->add_option("--checkpoint", checkpoint, "Write a resumable checkpoint here after each generation");
    train->add_option("--resume", resume, "Resume from a checkpoint file");
    train->add_option("--out", train_out, "Policy output path")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Holevo variance of a stored policy");
    std::string eval_policy, eval_state, eval_out;
    std::optional<double> eval_phi;
    std::optional<std::size_t> eval_random;
    std::uint64_t eval_seed = 7;
    int eval_shots = 10000;
    evaluate->add_option("--policy", eval_policy, "Policy JSON")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--state", eval_state, "Override the policy's input state");
    auto* phi_opt = evaluate->add_option("--phi", eval_phi, "Fixed true phase (radians)");
    auto* random_opt = evaluate->add_option("--random", eval_random, "Number of uniformly random true phases");
    phi_opt->excludes(random_opt);
    evaluate->add_option("--shots", eval_shots, "Shots at the fixed phase");
    evaluate->add_option("--seed", eval_seed, "Sampling seed");
    evaluate->add_option("--out", eval_out, "Write the JSON report here instead of stdout");

    // fisher
    auto* fisher = app.add_subcommand("fisher", "Fisher information and Cramer-Rao bound of a policy");
    std::string fisher_policy, fisher_state, fisher_out;
    double fisher_phi = 0.0, step = aqem::kFisherDefaultStep;
    fisher->add_option("--policy", fisher_policy, "Policy JSON")->required()->check(CLI::ExistingFile);
    fisher->add_option("--phi", fisher_phi, "True phase (radians)")->required();
    fisher->add_option("--step", step, "Finite-difference step h")->check(CLI::Range(1e-6, 1e-3));
    fisher->add_option("--state", fisher_state, "Override the policy's input state");
    fisher->add_option("--out", fisher_out, "Write the JSON report here instead of stdout");

    // scaling
    auto* scaling = app.add_subcommand("scaling", "Train over a range of N and fit V_H ~ N^gamma");
    aqem::ScalingOptions sc;
    std::string sc_state = "sine", sc_out;
    scaling->add_option("--n-min", sc.n_min, "Smallest N")->check(CLI::Range(1, 1000));
    scaling->add_option("--n-max", sc.n_max, "Largest N")->check(CLI::Range(1, 1000));
    scaling->add_option("--state", sc_state, "Input state")->check(CLI::IsMember({"sine", "product"}));
    scaling->add_option("--seed", sc.seed, "Base seed");
    scaling->add_option("--pop", sc.population, "Population size (default max(40, 4N))");
    scaling->add_option("--gens", sc.generations, "Generations for every N");
    scaling->add_option("--gens-per-n", sc.gens_per_n, "Generations per photon when --gens is absent");
    scaling->add_option("--weight", sc.weight, "Differential weight F");
    scaling->add_option("--cr", sc.crossover, "Crossover rate CR");
    scaling->add_option("--workers", sc.workers, "Parallel per-N jobs");
    scaling->add_option("--out", sc_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*train) {
            aqem::TrainingOptions opts;
            opts.photons = train_n;
            opts.state = aqem::parse_state_kind(train_state);
            opts.seed = train_seed;
            opts.de = aqem::DEConfig::defaults_for(train_n);
            if (pop) opts.de.population = *pop;
            if (gens) opts.de.generations = *gens;
            opts.de.weight = weight;
            opts.de.crossover = cr;
            opts.de.shots_per_phi = shots;
            opts.de.workers = workers;

            aqem::DEHooks hooks;
            if (!checkpoint.empty())
                hooks.on_generation = [&](const aqem::DECheckpoint& c) {
                    aqem::write_file_atomic(checkpoint, c.to_json());
                };
            std::optional<aqem::DECheckpoint> start;
            if (!resume.empty()) start = aqem::DECheckpoint::from_json(aqem::read_file(resume));

            const auto outcome = aqem::run_training(opts, hooks, start);
            const auto report = aqem::write_training_outputs(outcome, train_out);
            std::cout << aqem::training_report_json(outcome);
            std::cerr << "wrote " << train_out << " and " << report << "\n";
        } else if (*evaluate) {
            const auto file = aqem::read_policy(eval_policy);
            const auto input = aqem::make_input_state(state_for(file, eval_state), file.policy.size());
            nlohmann::ordered_json j;
            j["n"] = file.policy.size();
            if (eval_phi) {
                const aqem::TrainingSet fixed{std::vector<double>(eval_shots, aqem::wrap_angle(*eval_phi)), 0};
                const auto pairs = aqem::run_shots(file.policy, input, fixed, eval_seed);
                const auto r = aqem::sharpness_and_holevo(pairs);
                j["phi"] = *eval_phi;
                j["shots"] = eval_shots;
                j["sharpness"] = r.sharpness;
                j["v_h"] = r.unsharp ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.holevo_variance);
                j["bias"] = r.bias.value_or(0.0);
                if (file.policy.size() <= 20) {
                    const auto dist = aqem::estimate_distribution(input, file.policy, *eval_phi);
                    const auto exact = aqem::sharpness_and_holevo(dist);
                    j["exact_support"] = dist.support.size();
                    j["exact_v_h"] = exact.unsharp ? nlohmann::ordered_json(nullptr)
                                                   : nlohmann::ordered_json(exact.holevo_variance);
                    j["exact_bias"] = exact.bias.value_or(0.0);
                    j["exact_plain_variance"] = aqem::plain_variance(dist);
                }
            } else {
                const std::size_t count = eval_random.value_or(0);
                const auto stats = aqem::evaluate_holdout(file.policy, input, eval_seed, count);
                j["random_phases"] = count ? count : 10 * file.policy.size() * file.policy.size();
                j["v_h"] = stats.holevo_variance;
                j["std_err"] = stats.std_error;
                j["sharpness"] = stats.sharpness;
            }
            emit(j.dump(2) + "\n", eval_out);
        } else if (*fisher) {
            const auto file = aqem::read_policy(fisher_policy);
            const auto input = aqem::make_input_state(state_for(file, fisher_state), file.policy.size());
            const auto report = aqem::fisher_information(input, file.policy, fisher_phi, step);
            if (report.warning)
                std::cerr << "warning: excluded probability mass " << report.excluded_mass
                          << " exceeds " << aqem::kFisherExcludedMassWarning << "\n";
            emit(aqem::fisher_report_to_json(report), fisher_out);
            if (!(report.fisher > 0.0)) return kExitNumerical;
        } else if (*scaling) {
            sc.state = aqem::parse_state_kind(sc_state);
            const auto result = aqem::run_scaling(sc);
            aqem::write_scaling_outputs(result, sc, sc_out);
            std::cout << aqem::scaling_json(result, sc);
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const aqem::DegenerateBranchError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::length_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
