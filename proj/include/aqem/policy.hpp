#pragma once

// Markovian feedback policies and decision-tree bookkeeping.

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numbers>
#include <optional>
#include <ranges>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqem {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2pi).
double wrap_angle(double angle);

/// Reduce an angle into (-pi, pi].
double wrap_signed(double angle);

/// Feedback increments (Delta_1, ..., Delta_N), each in [0, 2pi).
class Policy {
public:
    Policy() = default;
    explicit Policy(Eigen::VectorXd deltas);

    static Policy zeros(int n) { return Policy(Eigen::VectorXd::Zero(n)); }

    int size() const { return static_cast<int>(deltas_.size()); }
    double operator[](int m) const { return deltas_(m); }
    const Eigen::VectorXd& deltas() const { return deltas_; }

    bool operator==(const Policy&) const = default;

private:
    Eigen::VectorXd deltas_;
};

/// Outcomes x_1..x_M and the control-phase trajectory Phi_0..Phi_M.
struct OutcomeHistory {
    std::vector<int> outcomes;
    std::vector<double> phases{0.0};

    double estimate() const { return phases.back(); }
};

/// Phi_m = Phi_{m-1} - (-1)^x Delta_m, reduced into [0, 2pi).
double feedback_update(double phase_prev, int outcome, double delta);

/// Number of branches sum_{m=1..M} (d^L)^m of the full decision tree.
boost::multiprecision::cpp_int policy_tree_size(int levels, int bundle, int measurements);

inline constexpr int kMaxEnumerablePhotons = 26;

/// Deterministic trajectory of the outcome string encoded in `bits`
/// (bit m-1 holds x_m).
OutcomeHistory history_for(const Policy& policy, std::uint64_t bits);

/// All 2^N outcome strings in order of their bit encoding, each with its
/// phase trajectory under `policy`. Lazy; the policy must outlive the view.
inline auto enumerate_histories(const Policy& policy) {
    if (policy.size() > kMaxEnumerablePhotons)
        throw std::length_error("enumerate_histories: N = " + std::to_string(policy.size()) +
                                " exceeds the enumeration limit of " +
                                std::to_string(kMaxEnumerablePhotons));
    const std::uint64_t count = std::uint64_t{1} << policy.size();
    return std::views::iota(std::uint64_t{0}, count) |
           std::views::transform([&policy](std::uint64_t bits) { return history_for(policy, bits); });
}

struct PolicyMeta {
    std::optional<std::uint64_t> seed;
    std::optional<int> generations;
    std::optional<double> objective;
    std::optional<std::string> state;
};

struct PolicyFile {
    Policy policy;
    PolicyMeta meta;
};

/// JSON text {"n": N, "deltas": [...], "meta": {...}}; doubles are written
/// in shortest round-trip form, so reading back is bit-exact.
std::string policy_to_json(const PolicyFile& file);
PolicyFile policy_from_json(const std::string& text);

void write_policy(const std::string& path, const PolicyFile& file);
PolicyFile read_policy(const std::string& path);

/// Write through a temporary sibling and rename into place.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace aqem
