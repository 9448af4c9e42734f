#include "aqem/inference.hpp"
#include "aqem/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace aqem;
using std::numbers::pi;

namespace {

Policy random_policy(int n, Rng& rng) {
    Eigen::VectorXd d(n);
    for (int m = 0; m < n; ++m) d(m) = kTwoPi * uniform01(rng);
    return Policy(d);
}

// Increments on the lattice 2 pi k / q keep every control phase on that
// lattice, so a true phase chosen away from it (and from it shifted by pi)
// stays clear of the points where a single-photon branch probability is 0 or 1.
struct LatticeInstance {
    Policy policy;
    double phi;
};

LatticeInstance lattice_instance(int n, Rng& rng, double margin) {
    const int q = 5 + static_cast<int>(uniform_index(rng, 16));
    Eigen::VectorXd d(n);
    for (int m = 0; m < n; ++m) d(m) = kTwoPi * static_cast<double>(uniform_index(rng, q)) / q;
    for (;;) {
        const double phi = kTwoPi * uniform01(rng);
        double closest = pi;
        for (int j = 0; j < q; ++j)
            for (double shift : {0.0, pi})
                closest = std::min(closest, std::abs(wrap_signed(phi - kTwoPi * j / q - shift)));
        if (closest >= margin) return {Policy(d), phi};
    }
}

}  // namespace

TEST(OutcomeDistribution, SinglePhotonAlignedIsDeterministic) {
    const auto dist = outcome_distribution(product_state(1), Policy::zeros(1), 0.0);
    ASSERT_EQ(dist.probabilities.size(), 2u);
    EXPECT_NEAR(dist.probabilities[0], 0.0, 1e-15);
    EXPECT_NEAR(dist.probabilities[1], 1.0, 1e-15);
}

TEST(OutcomeDistribution, TotalMassIsOne) {
    Rng rng(31);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + static_cast<int>(uniform_index(rng, 12));
        const auto kind = t % 2 ? StateKind::sine : StateKind::product;
        const auto dist = outcome_distribution(make_input_state(kind, n), random_policy(n, rng), kTwoPi * uniform01(rng));
        ASSERT_NEAR(dist.total(), 1.0, 1e-9);
    }
}

TEST(OutcomeDistribution, MatchesFirstQuantizedSequentialMeasurement) {
    Rng rng(32);
    for (int t = 0; t < 10; ++t) {
        const int n = 1 + static_cast<int>(uniform_index(rng, 6));
        const auto input = sine_state(n);
        const auto policy = random_policy(n, rng);
        const double phi = kTwoPi * uniform01(rng);
        const auto dist = outcome_distribution(input, policy, phi);
        for (std::uint64_t bits = 0; bits < (1u << n); ++bits) {
            oracle::Vec full = oracle::embed_symmetric(input.amps);
            double control = 0.0;
            for (int m = 0; m < n; ++m) {
                const int x = (bits >> m) & 1;
                full = oracle::measure_last_photon(full, oracle::photon_unitary(phi, control), x);
                control = feedback_update(control, x, policy[m]);
            }
            ASSERT_NEAR(dist.probabilities[bits], full.squaredNorm(), 1e-12);
            ASSERT_EQ(dist.estimates[bits], control);
        }
    }
}

TEST(OutcomeDistribution, SixPhotonSineStateMatchesSampling) {
    Rng rng(33);
    const int n = 6, shots = 100000;
    const auto policy = random_policy(n, rng);
    const double phi = 1.9;
    const auto exact = outcome_distribution(sine_state(n), policy, phi);
    std::vector<double> freq(exact.probabilities.size(), 0.0);
    for (int t = 0; t < shots; ++t) {
        const auto shot = simulate_single_shot(sine_state(n), policy, phi, rng);
        std::size_t bits = 0;
        for (int m = 0; m < n; ++m) bits |= static_cast<std::size_t>(shot.history.outcomes[m]) << m;
        freq[bits] += 1.0 / shots;
    }
    EXPECT_LT(oracle::total_variation(exact.probabilities, freq), 0.02);
}

TEST(OutcomeDistribution, GuardsSizeAndLength) {
    EXPECT_THROW(outcome_distribution(product_state(27), Policy::zeros(27), 0.0), std::length_error);
    EXPECT_THROW(outcome_distribution(product_state(3), Policy::zeros(4), 0.0), std::domain_error);
}

TEST(EstimateDistribution, ZeroPolicyIsPointMassAtZero) {
    const auto dist = estimate_distribution(sine_state(5), Policy::zeros(5), 2.0);
    ASSERT_EQ(dist.support.size(), 1u);
    EXPECT_EQ(dist.support[0].estimate, 0.0);
    EXPECT_NEAR(dist.support[0].probability, 1.0, 1e-12);
}

TEST(EstimateDistribution, SupportBoundedAndMassConserved) {
    Rng rng(34);
    for (int t = 0; t < 40; ++t) {
        const int n = 1 + static_cast<int>(uniform_index(rng, 10));
        const auto dist = estimate_distribution(sine_state(n), random_policy(n, rng), kTwoPi * uniform01(rng));
        EXPECT_LE(dist.support.size(), std::size_t{1} << n);
        EXPECT_NEAR(dist.total(), 1.0, 1e-9);
        for (std::size_t i = 1; i < dist.support.size(); ++i)
            EXPECT_GT(dist.support[i].estimate - dist.support[i - 1].estimate, kEstimateMergeTolerance);
    }
}

TEST(EstimateDistribution, ThreePhotonGroupingMatchesDirectRegroup) {
    // Policies with collisions: increments that are rational multiples of pi
    // make different strings land on the same estimate.
    const std::vector<Eigen::VectorXd> policies = {
        (Eigen::VectorXd(3) << pi / 2, pi / 2, pi).finished(),
        (Eigen::VectorXd(3) << 0.0, 1.0, 0.0).finished(),
        (Eigen::VectorXd(3) << 0.4, 1.3, 2.9).finished(),
        (Eigen::VectorXd(3) << pi, pi, pi).finished(),
    };
    for (const auto& d : policies) {
        const Policy policy(d);
        const double phi = 0.77;
        const auto outcomes = outcome_distribution(sine_state(3), policy, phi);
        // Regroup by brute force: compare every pair of strings on the circle.
        std::vector<std::pair<double, double>> groups;  // (representative, mass)
        for (std::uint64_t bits = 0; bits < 8; ++bits) {
            const double est = history_for(policy, bits).estimate();
            bool placed = false;
            for (auto& g : groups) {
                if (std::abs(wrap_signed(g.first - est)) <= 1e-12) {
                    g.second += outcomes.probabilities[bits];
                    placed = true;
                    break;
                }
            }
            if (!placed) groups.emplace_back(est, outcomes.probabilities[bits]);
        }
        const auto dist = group_estimates(outcomes, phi);
        ASSERT_EQ(dist.support.size(), groups.size());
        for (const auto& g : groups) {
            bool found = false;
            for (const auto& p : dist.support) {
                if (std::abs(wrap_signed(p.estimate - g.first)) <= 1e-12) {
                    EXPECT_NEAR(p.probability, g.second, 1e-14);
                    found = true;
                }
            }
            EXPECT_TRUE(found) << g.first;
        }
    }
}

TEST(EstimateDistribution, MergesAcrossTheWrapPoint) {
    OutcomeDistribution od;
    od.photons = 1;
    od.probabilities = {0.25, 0.75};
    od.estimates = {0.0, std::nextafter(kTwoPi, 0.0)};
    const auto dist = group_estimates(od, 0.0);
    ASSERT_EQ(dist.support.size(), 1u);
    EXPECT_DOUBLE_EQ(dist.support[0].probability, 1.0);
}

TEST(Sharpness, PerfectEstimatesHaveZeroVariance) {
    const std::vector<std::pair<double, double>> pairs = {{0.3, 0.3}, {1.2, 1.2}, {6.0, 6.0}};
    const auto r = sharpness_and_holevo(pairs);
    EXPECT_NEAR(r.sharpness, 1.0, 1e-15);
    EXPECT_NEAR(r.holevo_variance, 0.0, 1e-14);
    EXPECT_FALSE(r.unsharp);
    EXPECT_FALSE(r.bias.has_value());
}

TEST(Sharpness, AntipodalErrorsAreUnsharp) {
    const std::vector<std::pair<double, double>> pairs = {{1.0, 1.0 + pi / 2}, {1.0, 1.0 - pi / 2}};
    const auto r = sharpness_and_holevo(pairs);
    EXPECT_TRUE(r.unsharp);
    EXPECT_TRUE(std::isinf(r.holevo_variance));
}

TEST(Sharpness, EmptyInputRejected) {
    EXPECT_THROW(sharpness_and_holevo(std::span<const std::pair<double, double>>{}), std::domain_error);
}

TEST(Sharpness, WrappedNormalMatchesCircularMoment) {
    // For errors ~ wrapped N(0, s^2), E[e^{i err}] = e^{-s^2/2}, so
    // V_H = e^{s^2} - 1.
    const double sigma = 0.1;
    std::mt19937_64 gen(35);
    std::normal_distribution<double> normal(0.0, sigma);
    std::uniform_real_distribution<double> circle(0.0, kTwoPi);
    std::vector<std::pair<double, double>> pairs(1000000);
    for (auto& p : pairs) {
        const double phi = circle(gen);
        p = {phi, wrap_angle(phi + normal(gen))};
    }
    const double expected = std::exp(sigma * sigma) - 1.0;
    EXPECT_NEAR(sharpness_and_holevo(pairs).holevo_variance, expected, 0.02 * expected);
}

TEST(Sharpness, VarianceConsistentWithSharpness) {
    Rng rng(36);
    std::vector<std::pair<double, double>> pairs(500);
    for (auto& p : pairs) p = {kTwoPi * uniform01(rng), kTwoPi * uniform01(rng) * 0.3};
    const auto r = sharpness_and_holevo(pairs);
    EXPECT_NEAR(r.holevo_variance, 1.0 / (r.sharpness * r.sharpness) - 1.0, 1e-12);
    EXPECT_GE(r.sharpness, 0.0);
    EXPECT_LE(r.sharpness, 1.0);
}

TEST(Sharpness, InvariantUnderGlobalRotation) {
    Rng rng(37);
    std::vector<std::pair<double, double>> pairs(300);
    for (auto& p : pairs) {
        const double phi = kTwoPi * uniform01(rng);
        p = {phi, wrap_angle(phi + 0.8 * (uniform01(rng) - 0.5))};
    }
    const auto base = sharpness_and_holevo(pairs);
    for (double shift : {0.1, 2.0, -4.4}) {
        auto rotated = pairs;
        for (auto& p : rotated) p = {wrap_angle(p.first + shift), wrap_angle(p.second + shift)};
        const auto r = sharpness_and_holevo(rotated);
        EXPECT_NEAR(r.sharpness, base.sharpness, 1e-12);
        EXPECT_NEAR(r.holevo_variance, base.holevo_variance, 1e-10);
    }
}

TEST(Sharpness, BiasReportedForSinglePhase) {
    const std::vector<std::pair<double, double>> pairs = {{1.0, 1.2}, {1.0, 1.2}, {1.0, 1.2}};
    const auto r = sharpness_and_holevo(pairs);
    ASSERT_TRUE(r.bias.has_value());
    EXPECT_NEAR(*r.bias, 0.2, 1e-14);
}

TEST(PlainVariance, PointMassAtTruthIsZero) {
    EstimateDistribution d;
    d.true_phi = 1.5;
    d.support = {{1.5, 1.0}};
    EXPECT_EQ(plain_variance(d), 0.0);
}

TEST(PlainVariance, SymmetricPairGivesSquaredOffset) {
    EstimateDistribution d;
    d.true_phi = 0.1;  // errors cross the wrap point
    d.support = {{0.4, 0.5}, {wrap_angle(0.1 - 0.3), 0.5}};
    EXPECT_NEAR(plain_variance(d), 0.09, 1e-14);
}

TEST(PlainVariance, MatchesDirectWeightedSum) {
    Rng rng(38);
    EstimateDistribution d;
    d.true_phi = 4.0;
    double mass = 0.0;
    for (int k = 0; k < 30; ++k) {
        const double w = uniform01(rng);
        d.support.push_back({kTwoPi * (k + uniform01(rng)) / 30.0, w});
        mass += w;
    }
    double direct = 0.0;
    for (auto& p : d.support) {
        p.probability /= mass;
        double e = std::remainder(p.estimate - d.true_phi, kTwoPi);
        if (e <= -pi) e += kTwoPi;
        direct += p.probability * e * e;
    }
    EXPECT_NEAR(plain_variance(d), direct, 1e-13);
}

TEST(Fisher, SinglePhotonCarriesUnitInformation) {
    for (double control : {0.0, 0.3, 1.7, 4.0}) {
        Eigen::VectorXd d(1);
        d << 0.0;
        // Phi_0 = 0 for the only photon; move phi instead.
        const double phi = control + 0.9;
        const auto r = fisher_information(product_state(1), Policy(d), phi);
        EXPECT_NEAR(r.fisher, 1.0, 1e-6) << phi;
        EXPECT_EQ(r.excluded_mass, 0.0);
        EXPECT_FALSE(r.warning);
    }
}

TEST(Fisher, ProductStateInformationIsAdditive) {
    Rng rng(39);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + static_cast<int>(uniform_index(rng, 12));
        const auto inst = lattice_instance(n, rng, 0.05);
        const auto r = fisher_information(product_state(n), inst.policy, inst.phi);
        EXPECT_NEAR(r.fisher, n, 1e-3) << "N=" << n << " phi=" << inst.phi;
    }
}

TEST(Fisher, NeverNegative) {
    Rng rng(40);
    for (int t = 0; t < 30; ++t) {
        const int n = 1 + static_cast<int>(uniform_index(rng, 8));
        const auto kind = t % 2 ? StateKind::sine : StateKind::product;
        const auto r = fisher_information(make_input_state(kind, n), random_policy(n, rng), kTwoPi * uniform01(rng));
        EXPECT_GE(r.fisher, 0.0);
    }
}

TEST(Fisher, ExcludedMassIsFlagged) {
    // phi = Phi for every photon of a zero policy: the all-ones string has
    // probability 1 and everything else is excluded, but its mass is tiny.
    const auto r = fisher_information(product_state(3), Policy::zeros(3), 0.0);
    EXPECT_LT(r.excluded_mass, 1e-6);
    EXPECT_FALSE(r.warning);
    // A state with mass spread over many sub-floor branches.
    ComplexVector<double> amps = ComplexVector<double>::Constant(13, 1e-4);
    amps(12) = 1.0;
    const auto spread = fisher_information(SymmetricState(12, amps).normalized(), Policy::zeros(12), 0.0);
    EXPECT_GE(spread.excluded_mass, 0.0);
    EXPECT_EQ(spread.warning, spread.excluded_mass > kFisherExcludedMassWarning);
}

TEST(Fisher, StepOutsideRangeRejected) {
    EXPECT_THROW(fisher_information(product_state(2), Policy::zeros(2), 0.5, 1e-7), std::domain_error);
    EXPECT_THROW(fisher_information(product_state(2), Policy::zeros(2), 0.5, 1e-2), std::domain_error);
}

TEST(Fisher, BiasedDiscreteEstimatorCanBeatTheUnbiasedBound) {
    // One photon, no feedback: the estimate is always 0, so the spread
    // around phi = 0.5 is 0.5 while 1/sqrt(F) = 1. The bound only holds for
    // unbiased estimators, and at very small N the slack of 0.9 is not
    // enough to absorb the bias.
    const auto r = fisher_information(product_state(1), Policy::zeros(1), 0.5);
    EXPECT_NEAR(r.fisher, 1.0, 1e-6);
    const auto dist = estimate_distribution(product_state(1), Policy::zeros(1), 0.5);
    EXPECT_NEAR(std::sqrt(plain_variance(dist)), 0.5, 1e-15);
    EXPECT_LT(std::sqrt(plain_variance(dist)), 0.9 * crlb(r.fisher));
}

TEST(Fisher, SpreadOfEstimatesRespectsCramerRaoFromSixPhotons) {
    Rng rng(41);
    for (int n = 6; n <= 12; ++n) {
        for (int t = 0; t < 40; ++t) {
            const auto inst = lattice_instance(n, rng, 0.05);
            const auto f = fisher_information(product_state(n), inst.policy, inst.phi).fisher;
            const auto dist = estimate_distribution(product_state(n), inst.policy, inst.phi);
            ASSERT_GE(std::sqrt(plain_variance(dist)), 0.9 * crlb(f)) << "N=" << n << " phi=" << inst.phi;
        }
    }
}

TEST(Crlb, Examples) {
    EXPECT_EQ(crlb(1.0), 1.0);
    EXPECT_EQ(crlb(4.0), 0.5);
    for (int n = 1; n <= 16; ++n) EXPECT_NEAR(crlb(n), 1.0 / std::sqrt(n), 1e-15);
    EXPECT_THROW(crlb(0.0), std::domain_error);
    EXPECT_THROW(crlb(-1.0), std::domain_error);
}

TEST(FisherJson, CarriesReportFields) {
    const auto r = fisher_information(product_state(2), Policy::zeros(2), 1.0);
    const auto j = nlohmann::json::parse(fisher_report_to_json(r));
    for (const char* key : {"n", "phi", "fisher", "crlb", "excluded_mass", "h"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["n"], 2);
    EXPECT_DOUBLE_EQ(j["crlb"].get<double>(), crlb(r.fisher));
    FisherReport zero;
    EXPECT_TRUE(nlohmann::json::parse(fisher_report_to_json(zero))["crlb"].is_null());
}
