#include "aqem/symstate.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace aqem;

TEST(WignerD, SpinHalfDiagonalIsCosQuarterPi) {
    EXPECT_NEAR(wigner_d_half_pi(1, 1, 1), std::cos(std::numbers::pi / 4), 1e-15);
    EXPECT_NEAR(wigner_d_half_pi(1, -1, -1), std::cos(std::numbers::pi / 4), 1e-15);
}

TEST(WignerD, SpinZeroIsIdentity) { EXPECT_EQ(wigner_d_half_pi(0, 0, 0), 1.0); }

TEST(WignerD, SpinFiveRowsHaveUnitNorm) {
    const WignerDTable<double> d(10);
    for (int two_m = -10; two_m <= 10; two_m += 2) {
        double sum = 0.0;
        for (int two_mp = -10; two_mp <= 10; two_mp += 2) sum += d(two_m, two_mp) * d(two_m, two_mp);
        EXPECT_NEAR(sum, 1.0, 1e-13) << "m = " << two_m / 2;
    }
}

TEST(WignerD, MatchesFactorialSumOracle) {
    for (int two_j : {1, 2, 5, 10, 17, 40}) {
        const WignerDTable<double> d(two_j);
        for (int two_m = -two_j; two_m <= two_j; two_m += 2)
            for (int two_mp = -two_j; two_mp <= two_j; two_mp += 2)
                ASSERT_NEAR(d(two_m, two_mp), static_cast<double>(oracle::wigner_d_sum(two_j, two_m, two_mp)),
                            1e-13)
                    << "2j=" << two_j << " 2m=" << two_m << " 2m'=" << two_mp;
    }
}

TEST(WignerD, MatchesOracleAtTwoJHundred) {
    const WignerDTable<double> d(100);
    for (int two_m : {-100, -62, -2, 0, 4, 50, 98})
        for (int two_mp = -100; two_mp <= 100; two_mp += 6)
            ASSERT_NEAR(d(two_m, two_mp), static_cast<double>(oracle::wigner_d_sum(100, two_m, two_mp)), 1e-11)
                << "2m=" << two_m << " 2m'=" << two_mp;
}

TEST(WignerD, RowsAndColumnsOrthonormalUpToTwoJHundred) {
    for (int two_j = 0; two_j <= 100; ++two_j) {
        const WignerDTable<double> d(two_j);
        const Eigen::MatrixXd gram_rows = d.matrix() * d.matrix().transpose();
        const Eigen::MatrixXd gram_cols = d.matrix().transpose() * d.matrix();
        const auto eye = Eigen::MatrixXd::Identity(two_j + 1, two_j + 1);
        ASSERT_LT((gram_rows - eye).cwiseAbs().maxCoeff(), 1e-10) << "2j=" << two_j;
        ASSERT_LT((gram_cols - eye).cwiseAbs().maxCoeff(), 1e-10) << "2j=" << two_j;
    }
}

TEST(WignerD, RejectsOutOfRangeIndices) {
    EXPECT_THROW(wigner_d_half_pi(2, 4, 0), std::domain_error);
    EXPECT_THROW(wigner_d_half_pi(2, 0, -4), std::domain_error);
    EXPECT_THROW(wigner_d_half_pi(2, 1, 0), std::domain_error);  // parity mismatch
    EXPECT_THROW(wigner_d_half_pi(-1, 0, 0), std::domain_error);
}

TEST(SineState, NormalizedAtFour) {
    const auto s = sine_state(4);
    EXPECT_EQ(s.photons, 4);
    EXPECT_EQ(s.amps.size(), 5);
    EXPECT_NEAR(s.amps.squaredNorm(), 1.0, 1e-10);
}

TEST(SineState, SinglePhotonMatchesTwoTermFormula) {
    // (3/2)^{-1/2} sum_k sin((k+1)pi/3) e^{i pi (k-n)/2} d_{n-1/2,k-1/2}, with
    // d^{1/2}(pi/2) = [[1, 1], [-1, 1]] / sqrt 2 in offset indices, gives
    // psi_0 = psi_1 = (1 + i) / 2.
    const auto s = sine_state(1);
    const std::complex<double> expected(0.5, 0.5);
    EXPECT_NEAR(std::abs(s.amps(0) - expected), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(s.amps(1) - expected), 0.0, 1e-15);
}

TEST(SineState, MatchesExtendedPrecisionSummation) {
    for (int n : {2, 5, 10}) {
        const auto s = sine_state_with_norm(n);
        const auto ref = oracle::sine_state_literal(n);
        for (int k = 0; k <= n; ++k)
            EXPECT_NEAR(std::abs(s.state.amps(k) - ref[k]), 0.0, 1e-8) << "N=" << n << " n=" << k;
    }
}

TEST(SineState, ArmBasisAmplitudesAreSineWeights) {
    // After the first beamsplitter the state is sum_k sin((k+1)pi/(N+2)) |k, N-k>
    // up to a global phase, with no relative phases (convention check; see
    // interferometer.hpp).
    const int n = 6;
    const auto s = sine_state(n);
    const auto full = oracle::embed_symmetric(s.amps);
    const double r = 1 / std::sqrt(2.0);
    Eigen::Matrix2cd bs;
    bs << r, std::complex<double>(0, r), std::complex<double>(0, r), r;
    Eigen::MatrixXcd u = bs;
    for (int k = 1; k < n; ++k) {
        Eigen::MatrixXcd next(u.rows() * 2, u.cols() * 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) next.block(i * u.rows(), j * u.cols(), u.rows(), u.cols()) = bs(i, j) * u;
        u = next;
    }
    const Eigen::VectorXcd arms = u * full;
    const double norm = std::sqrt((n + 2) / 2.0);
    auto arm_amplitude = [&](int k) {
        Eigen::VectorXcd basis = Eigen::VectorXcd::Zero(n + 1);
        basis(k) = 1.0;
        return oracle::embed_symmetric(basis).dot(arms);
    };
    const std::complex<double> global = arm_amplitude(0) / std::abs(arm_amplitude(0));
    for (int k = 0; k <= n; ++k) {
        const auto amp = arm_amplitude(k) / global;
        EXPECT_NEAR(std::abs(amp - std::sin((k + 1) * std::numbers::pi / (n + 2)) / norm), 0.0, 1e-12)
            << "k=" << k;
    }
}

TEST(SineState, PreNormalizationNormStableUpToHundred) {
    for (int n = 1; n <= 100; ++n) {
        const auto s = sine_state_with_norm(n);
        ASSERT_NEAR(s.raw_norm, 1.0, 1e-6) << "N=" << n;
        ASSERT_NEAR(s.state.amps.squaredNorm(), 1.0, 1e-12) << "N=" << n;
    }
}

TEST(SineState, RejectsNonPositive) {
    EXPECT_THROW(sine_state(0), std::domain_error);
    EXPECT_THROW(sine_state(-3), std::domain_error);
}

TEST(SineState, ExtendedPrecisionTemplateAgrees) {
    const auto d = sine_state(12);
    const auto ld = sine_state<long double>(12);
    for (int k = 0; k <= 12; ++k) {
        EXPECT_NEAR(d.amps(k).real(), static_cast<double>(ld.amps(k).real()), 1e-14);
        EXPECT_NEAR(d.amps(k).imag(), static_cast<double>(ld.amps(k).imag()), 1e-14);
    }
}

TEST(ProductState, AllPhotonsInModeA) {
    const auto s3 = product_state(3);
    ASSERT_EQ(s3.amps.size(), 4);
    EXPECT_EQ(s3.amps(0), 0.0);
    EXPECT_EQ(s3.amps(1), 0.0);
    EXPECT_EQ(s3.amps(2), 0.0);
    EXPECT_EQ(s3.amps(3), 1.0);

    const auto s1 = product_state(1);
    EXPECT_EQ(s1.amps(0), 0.0);
    EXPECT_EQ(s1.amps(1), 1.0);

    for (int n = 1; n <= 50; ++n) EXPECT_EQ(product_state(n).amps.squaredNorm(), 1.0);
    EXPECT_THROW(product_state(0), std::domain_error);
}

TEST(SymmetricState, LengthInvariantEnforced) {
    EXPECT_THROW(SymmetricState(3, ComplexVector<double>::Zero(3)), std::domain_error);
    EXPECT_THROW(SymmetricState(2, ComplexVector<double>::Zero(3)).normalized(), std::domain_error);
}

TEST(StateKind, NamesRoundTrip) {
    for (auto kind : {StateKind::sine, StateKind::product}) EXPECT_EQ(parse_state_kind(to_string(kind)), kind);
    EXPECT_THROW(parse_state_kind("noon"), std::invalid_argument);
    EXPECT_EQ(make_input_state(StateKind::product, 4).amps, product_state(4).amps);
    EXPECT_EQ(make_input_state(StateKind::sine, 4).amps, sine_state(4).amps);
}
