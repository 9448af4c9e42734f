#include "aqem/policy.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace aqem {

double wrap_angle(double angle) {
    // Fast path for one step outside the range. x - 2pi is exact here
    // (Sterbenz), so this agrees with fmod bit for bit.
    if (angle >= kTwoPi && angle < 2.0 * kTwoPi) return angle - kTwoPi;
    if (angle >= 0.0 && angle < kTwoPi) return angle;
    double r = std::fmod(angle, kTwoPi);
    if (r < 0) r += kTwoPi;
    // -tiny + 2pi rounds to 2pi
    if (r >= kTwoPi) r = 0.0;
    return r;
}

double wrap_signed(double angle) {
    double r = wrap_angle(angle);
    if (r > std::numbers::pi) r -= kTwoPi;
    return r;
}

Policy::Policy(Eigen::VectorXd deltas) : deltas_(std::move(deltas)) {
    for (Eigen::Index m = 0; m < deltas_.size(); ++m) {
        if (!(deltas_(m) >= 0.0 && deltas_(m) < kTwoPi))
            throw std::domain_error("Policy: increment " + std::to_string(m + 1) +
                                    " is outside [0, 2pi)");
    }
}

double feedback_update(double phase_prev, int outcome, double delta) {
    // -(-1)^x: x = 0 steps down, x = 1 steps up
    return wrap_angle(outcome ? phase_prev + delta : phase_prev - delta);
}

boost::multiprecision::cpp_int policy_tree_size(int levels, int bundle, int measurements) {
    if (levels < 2 || bundle < 1 || measurements < 1)
        throw std::domain_error("policy_tree_size: need d >= 2, L >= 1, M >= 1");
    using boost::multiprecision::cpp_int;
    const cpp_int branching = boost::multiprecision::pow(cpp_int(levels), bundle);
    // d^L (d^N - 1) / (d^L - 1), N = L M
    const cpp_int total = boost::multiprecision::pow(cpp_int(levels), bundle * measurements);
    return branching * (total - 1) / (branching - 1);
}

OutcomeHistory history_for(const Policy& policy, std::uint64_t bits) {
    OutcomeHistory h;
    const int n = policy.size();
    h.outcomes.reserve(n);
    h.phases.reserve(n + 1);
    for (int m = 0; m < n; ++m) {
        const int x = static_cast<int>((bits >> m) & 1u);
        h.outcomes.push_back(x);
        h.phases.push_back(feedback_update(h.phases.back(), x, policy[m]));
    }
    return h;
}

std::string policy_to_json(const PolicyFile& file) {
    nlohmann::ordered_json j;
    j["n"] = file.policy.size();
    auto deltas = nlohmann::ordered_json::array();
    for (int m = 0; m < file.policy.size(); ++m) deltas.push_back(file.policy[m]);
    j["deltas"] = std::move(deltas);
    auto meta = nlohmann::ordered_json::object();
    if (file.meta.seed) meta["seed"] = *file.meta.seed;
    if (file.meta.generations) meta["generations"] = *file.meta.generations;
    if (file.meta.objective) meta["objective"] = *file.meta.objective;
    if (file.meta.state) meta["state"] = *file.meta.state;
    j["meta"] = std::move(meta);
    return j.dump(2) + "\n";
}

PolicyFile policy_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const int n = j.at("n").get<int>();
    const auto& arr = j.at("deltas");
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
        throw std::runtime_error("policy file: 'deltas' must be an array of length n");
    Eigen::VectorXd deltas(n);
    for (int m = 0; m < n; ++m) deltas(m) = arr[m].get<double>();

    PolicyFile file{Policy(std::move(deltas)), {}};
    if (auto it = j.find("meta"); it != j.end() && it->is_object()) {
        const auto& meta = *it;
        if (meta.contains("seed")) file.meta.seed = meta["seed"].get<std::uint64_t>();
        if (meta.contains("generations")) file.meta.generations = meta["generations"].get<int>();
        if (meta.contains("objective") && meta["objective"].is_number())
            file.meta.objective = meta["objective"].get<double>();
        if (meta.contains("state")) file.meta.state = meta["state"].get<std::string>();
    }
    return file;
}

void write_policy(const std::string& path, const PolicyFile& file) {
    write_file_atomic(path, policy_to_json(file));
}

PolicyFile read_policy(const std::string& path) {
    try {
        return policy_from_json(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
        out << contents;
        if (!out) throw std::runtime_error(tmp.string() + ": write failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw std::runtime_error(path + ": rename failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace aqem
