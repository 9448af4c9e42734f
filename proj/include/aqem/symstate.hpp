#pragma once

// Two-mode N-photon states in the permutation-symmetric basis |n, R-n>,
// where n counts photons in mode a.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aqem {

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
struct BasicSymmetricState {
    int photons = 0;
    ComplexVector<Real> amps;

    BasicSymmetricState() : amps(ComplexVector<Real>::Zero(1)) {}
    BasicSymmetricState(int r, ComplexVector<Real> a) : photons(r), amps(std::move(a)) {
        if (r < 0 || amps.size() != r + 1)
            throw std::domain_error("SymmetricState: amplitude vector must have photons+1 entries");
    }

    Real squared_norm() const { return amps.squaredNorm(); }
    Real norm() const { return amps.norm(); }

    BasicSymmetricState normalized() const {
        const Real n = norm();
        if (!(n > Real(0)))
            throw std::domain_error("SymmetricState: cannot normalize a zero vector");
        return {photons, amps / n};
    }
};

using SymmetricState = BasicSymmetricState<double>;

/// Wigner small-d matrix d^j_{m,m'}(pi/2) = <j m| exp(-i pi/2 J_y) |j m'>.
///
/// Angular momenta are carried as doubled integers (two_j = 2j, two_m = 2m)
/// so half-integer index arithmetic stays exact. Each row is generated by the
/// three-term recursion in m'
///
///   sqrt((j-m')(j+m'+1)) d_{m,m'+1} + sqrt((j+m')(j-m'+1)) d_{m,m'-1} = -2m d_{m,m'}
///
/// run inward from both edges, seeded by the closed forms
///   d_{m, j} = sqrt(C(2j, j+m)) 2^-j
///   d_{m,-j} = (-1)^(j+m) sqrt(C(2j, j+m)) 2^-j.
/// Both edges lie in the decaying region of the row, so recursing toward the
/// middle follows the dominant solution and stays accurate up to 2j = 100 and
/// beyond, where the factorial sum loses everything to cancellation.
template <typename Real>
class WignerDTable {
public:
    explicit WignerDTable(int two_j) : two_j_(two_j) {
        if (two_j < 0) throw std::domain_error("WignerDTable: two_j must be non-negative");
        const int dim = two_j + 1;
        entries_.resize(dim, dim);
        for (int row = 0; row < dim; ++row) fill_row(row);
    }

    int two_j() const { return two_j_; }
    int dim() const { return two_j_ + 1; }

    /// Entry by doubled magnetic quantum numbers.
    Real operator()(int two_m, int two_m_prime) const {
        return entries_(index_of(two_m), index_of(two_m_prime));
    }

    /// Entry by offset indices n = j + m, k = j + m' in [0, 2j].
    Real at_offsets(int n, int k) const { return entries_(n, k); }

    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>& matrix() const { return entries_; }

private:
    int index_of(int two_m) const {
        if (two_m < -two_j_ || two_m > two_j_ || ((two_j_ - two_m) & 1))
            throw std::domain_error("wigner_d: magnetic quantum number " + std::to_string(two_m) +
                                    "/2 out of range for j = " + std::to_string(two_j_) + "/2");
        return (two_j_ + two_m) / 2;
    }

    void fill_row(int row) {
        using std::exp;
        using std::lgamma;
        using std::log;
        using std::sqrt;
        const int dim = two_j_ + 1;
        const Real j = Real(two_j_) / 2;
        const Real m = Real(row) - j;
        const int jpm = row;             // j + m
        const int jmm = two_j_ - row;    // j - m
        const Real edge = exp((lgamma(Real(two_j_ + 1)) - lgamma(Real(jpm + 1)) -
                               lgamma(Real(jmm + 1))) / 2 -
                              j * log(Real(2)));

        auto d = entries_.row(row);
        if (dim == 1) {
            d(0) = Real(1);
            return;
        }
        // Column k corresponds to m' = k - j.
        auto up_coef = [&](int k) {  // sqrt((j-m')(j+m'+1))
            const Real mp = Real(k) - j;
            return sqrt((j - mp) * (j + mp + 1));
        };
        auto down_coef = [&](int k) {  // sqrt((j+m')(j-m'+1))
            const Real mp = Real(k) - j;
            return sqrt((j + mp) * (j - mp + 1));
        };

        const int mid = dim / 2;
        // From m' = j downward to column mid.
        d(dim - 1) = edge;
        if (dim - 2 >= mid) {
            // At k = dim-1 the up-neighbour coefficient vanishes.
            d(dim - 2) = -2 * m * d(dim - 1) / down_coef(dim - 1);
            for (int k = dim - 2; k > mid; --k)
                d(k - 1) = (-2 * m * d(k) - up_coef(k) * d(k + 1)) / down_coef(k);
        }
        // From m' = -j upward to column mid-1.
        d(0) = (jpm & 1) ? -edge : edge;
        if (mid - 1 >= 1) {
            d(1) = -2 * m * d(0) / up_coef(0);
            for (int k = 1; k < mid - 1; ++k)
                d(k + 1) = (-2 * m * d(k) - down_coef(k) * d(k - 1)) / up_coef(k);
        }
    }

    int two_j_;
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> entries_;
};

/// d^j_{m,m'}(pi/2) for a single element. Builds the full table; use
/// WignerDTable directly when many elements of one j are needed.
template <typename Real = double>
Real wigner_d_half_pi(int two_j, int two_m, int two_m_prime) {
    if (two_j < 0) throw std::domain_error("wigner_d: two_j must be non-negative");
    return WignerDTable<Real>(two_j)(two_m, two_m_prime);
}

template <typename Real>
struct SineStateConstruction {
    BasicSymmetricState<Real> state;
    Real raw_norm;  // norm before renormalization; drifts from 1 only by rounding
};

/// Entangled sine state
///   psi_n = (N/2+1)^{-1/2} sum_k sin((k+1) pi/(N+2)) e^{i pi (k-n)/2} d^{N/2}_{n-N/2, k-N/2}(pi/2).
/// With the beamsplitter convention of the interferometer module this is
/// exactly the sine-weighted superposition sum_k sin((k+1) pi/(N+2)) |k, N-k>
/// across the two arms, with no extra relative phases.
template <typename Real = double>
SineStateConstruction<Real> sine_state_with_norm(int photons) {
    if (photons <= 0) throw std::domain_error("sine_state: N must be positive");
    const int N = photons;
    const WignerDTable<Real> d(N);
    const Real pi = std::numbers::pi_v<Real>;

    Eigen::Matrix<Real, Eigen::Dynamic, 1> weights(N + 1);
    for (int k = 0; k <= N; ++k) weights(k) = std::sin(Real(k + 1) * pi / Real(N + 2));

    // e^{i pi (k-n)/2} = i^{(k-n) mod 4}
    auto quarter_turn = [](int steps) -> std::complex<Real> {
        switch (((steps % 4) + 4) % 4) {
            case 0: return {1, 0};
            case 1: return {0, 1};
            case 2: return {-1, 0};
            default: return {0, -1};
        }
    };

    ComplexVector<Real> amps(N + 1);
    const Real prefactor = Real(1) / std::sqrt(Real(N) / 2 + 1);
    for (int n = 0; n <= N; ++n) {
        std::complex<Real> acc(0, 0);
        for (int k = 0; k <= N; ++k)
            acc += weights(k) * d.at_offsets(n, k) * quarter_turn(k - n);
        amps(n) = prefactor * acc;
    }
    BasicSymmetricState<Real> raw(N, std::move(amps));
    const Real raw_norm = raw.norm();
    return {raw.normalized(), raw_norm};
}

template <typename Real = double>
BasicSymmetricState<Real> sine_state(int photons) {
    return sine_state_with_norm<Real>(photons).state;
}

/// |1,0>^{(x)N}: every photon enters through mode a.
template <typename Real = double>
BasicSymmetricState<Real> product_state(int photons) {
    if (photons <= 0) throw std::domain_error("product_state: N must be positive");
    ComplexVector<Real> amps = ComplexVector<Real>::Zero(photons + 1);
    amps(photons) = Real(1);
    return {photons, std::move(amps)};
}

enum class StateKind { sine, product };

inline std::string to_string(StateKind kind) { return kind == StateKind::sine ? "sine" : "product"; }

inline StateKind parse_state_kind(const std::string& name) {
    if (name == "sine") return StateKind::sine;
    if (name == "product") return StateKind::product;
    throw std::invalid_argument("unknown state kind '" + name + "' (expected sine or product)");
}

inline SymmetricState make_input_state(StateKind kind, int photons) {
    return kind == StateKind::sine ? sine_state(photons) : product_state(photons);
}

}  // namespace aqem
