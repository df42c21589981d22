#pragma once

// Brute-force evolution on the full tensor-product space, for tiny systems.
// Nothing here is shared with the bosonic-sector construction: single-site
// matrices, Kronecker embedding and the kick generator are all built from
// scratch so that agreement between the two is a real check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pdlab/linalg.hpp"
#include "pdlab/model.hpp"

namespace pdlab::oracle {

inline constexpr long max_dimension = 4096;

/// State on the full product space.
struct FullState {
    Eigen::VectorXcd amplitudes;
    std::vector<int> local_dims;
};

/// Spin-l matrices in the basis m = -l, ..., l (ascending).
struct SpinMatrices {
    Eigen::MatrixXd sx;
    Eigen::MatrixXd sz;
};

[[nodiscard]] inline SpinMatrices spin_matrices(int twice_l) {
    const int d = twice_l + 1;
    const double l = 0.5 * twice_l;
    SpinMatrices s{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
    for (int a = 0; a < d; ++a) {
        const double m = a - l;
        s.sz(a, a) = m;
        if (a + 1 < d) {
            // <m+1|s^+|m> = sqrt((l - m)(l + m + 1)); s^x = (s^+ + s^-)/2.
            const double up = std::sqrt((l - m) * (l + m + 1.0));
            s.sx(a + 1, a) = 0.5 * up;
            s.sx(a, a + 1) = 0.5 * up;
        }
    }
    return s;
}

/// Product space of sites with given local dimensions. Site 0 is the most
/// significant tensor factor.
class ProductSpace {
public:
    explicit ProductSpace(std::vector<int> dims) : dims_(std::move(dims)) {
        dim_ = 1;
        for (int d : dims_) {
            if (d < 2) throw std::invalid_argument("oracle: local dimension must be >= 2");
            dim_ *= d;
            if (dim_ > max_dimension) throw std::length_error("oracle: product dimension exceeds 4096");
        }
        stride_.assign(dims_.size(), 1);
        for (int s = static_cast<int>(dims_.size()) - 2; s >= 0; --s)
            stride_[static_cast<std::size_t>(s)] = stride_[static_cast<std::size_t>(s + 1)] * dims_[static_cast<std::size_t>(s + 1)];
    }

    [[nodiscard]] long dimension() const noexcept { return dim_; }
    [[nodiscard]] int sites() const noexcept { return static_cast<int>(dims_.size()); }
    [[nodiscard]] const std::vector<int>& dims() const noexcept { return dims_; }

    [[nodiscard]] int digit(long index, int site) const {
        return static_cast<int>((index / stride_[static_cast<std::size_t>(site)]) % dims_[static_cast<std::size_t>(site)]);
    }

    /// Operator acting as `op` on one site and identity elsewhere.
    [[nodiscard]] Eigen::MatrixXd on_site(const Eigen::MatrixXd& op, int site) const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
        const long st = stride_[static_cast<std::size_t>(site)];
        const int d = dims_[static_cast<std::size_t>(site)];
        for (long col = 0; col < dim_; ++col) {
            const int a = digit(col, site);
            const long base = col - a * st;
            for (int b = 0; b < d; ++b) {
                const double v = op(b, a);
                if (v != 0.0) out(base + b * st, col) += v;
            }
        }
        return out;
    }

    /// Product state with local basis index `digits[s]` on site s.
    [[nodiscard]] FullState basis_state(const std::vector<int>& digits) const {
        long idx = 0;
        for (int s = 0; s < sites(); ++s) idx += digits[static_cast<std::size_t>(s)] * stride_[static_cast<std::size_t>(s)];
        FullState st{Eigen::VectorXcd::Zero(dim_), dims_};
        st.amplitudes[idx] = 1.0;
        return st;
    }

private:
    std::vector<int> dims_;
    std::vector<long> stride_;
    long dim_ = 1;
};

/// Free generator, kick generator and observable of a brute-force model.
struct FullModel {
    ProductSpace space;
    Eigen::MatrixXd free_hamiltonian;
    Eigen::MatrixXd kick_generator;
    Eigen::VectorXd sz;  // diagonal of the total S^z
    FullState initial;
    int N;
};

/// Spins of magnitude l on N sites:
/// H = sum_j [-(J/l)(s_j^z)^2 - 2h s_j^x] + delta(t)[phi sum_j s_j^x - K/(2Nl) sum_{i,j} s_i^x s_j^x].
[[nodiscard]] inline FullModel spin_model(const ModelParams& p) {
    p.validate();
    ProductSpace space(std::vector<int>(static_cast<std::size_t>(p.N), p.twice_l + 1));
    const auto sm = spin_matrices(p.twice_l);
    const long d = space.dimension();
    Eigen::MatrixXd hfree = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sx_total = Eigen::MatrixXd::Zero(d, d);
    const Eigen::MatrixXd local = -(p.J / p.l()) * sm.sz * sm.sz - 2.0 * p.h * sm.sx;
    for (int j = 0; j < p.N; ++j) {
        hfree += space.on_site(local, j);
        sx_total += space.on_site(sm.sx, j);
    }
    Eigen::MatrixXd kick = p.phi * sx_total - (p.K / (2.0 * p.N * p.l())) * sx_total * sx_total;
    Eigen::VectorXd sz = Eigen::VectorXd::Zero(d);
    for (long i = 0; i < d; ++i)
        for (int j = 0; j < p.N; ++j) sz[i] += space.digit(i, j) - p.l();
    auto init = space.basis_state(std::vector<int>(static_cast<std::size_t>(p.N), p.twice_l));
    return {std::move(space), std::move(hfree), std::move(kick), std::move(sz), std::move(init), p.N};
}

/// Each site made of 2l spin-1/2s:
/// H = sum_i [-(J/4l) sum_{m,m'} s^z s^z - h sum_m s^x]
///   + delta(t)[phi/2 sum s^x - K/(16Nl) sum_{i, j != i} sum_{m,m'} s^x_{i,m} s^x_{j,m'}]
/// with Pauli matrices s and S^z = (1/2) sum s^z.
[[nodiscard]] inline FullModel pauli_model(const ModelParams& p) {
    p.validate();
    const int L = p.twice_l;
    ProductSpace space(std::vector<int>(static_cast<std::size_t>(p.N * L), 2));
    const long d = space.dimension();
    Eigen::Matrix2d px;
    px << 0, 1, 1, 0;
    Eigen::Matrix2d pz;
    pz << -1, 0, 0, 1;  // local index 1 is spin up
    std::vector<Eigen::MatrixXd> sx_site(static_cast<std::size_t>(p.N), Eigen::MatrixXd::Zero(d, d));
    Eigen::MatrixXd hfree = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < p.N; ++i) {
        Eigen::MatrixXd zsum = Eigen::MatrixXd::Zero(d, d);
        for (int m = 0; m < L; ++m) {
            const int q = i * L + m;
            zsum += space.on_site(pz, q);
            sx_site[static_cast<std::size_t>(i)] += space.on_site(px, q);
        }
        hfree += -(p.J / (4.0 * p.l())) * zsum * zsum - p.h * sx_site[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd kick = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < p.N; ++i) {
        kick += 0.5 * p.phi * sx_site[static_cast<std::size_t>(i)];
        for (int j = 0; j < p.N; ++j)
            if (j != i)
                kick -= (p.K / (16.0 * p.N * p.l())) * sx_site[static_cast<std::size_t>(i)] * sx_site[static_cast<std::size_t>(j)];
    }
    Eigen::VectorXd sz = Eigen::VectorXd::Zero(d);
    for (long a = 0; a < d; ++a)
        for (int q = 0; q < space.sites(); ++q) sz[a] += space.digit(a, q) == 1 ? 0.5 : -0.5;
    auto init = space.basis_state(std::vector<int>(static_cast<std::size_t>(p.N * L), 1));
    return {std::move(space), std::move(hfree), std::move(kick), std::move(sz), std::move(init), p.N};
}

/// Dense one-period unitary exp(-i H_free tau) exp(-i G).
[[nodiscard]] inline Eigen::MatrixXcd full_floquet(const FullModel& m, double tau) {
    auto fe = linalg::symmetric_eigen(m.free_hamiltonian, "oracle H_free");
    auto ke = linalg::symmetric_eigen(m.kick_generator, "oracle kick");
    return linalg::spectral_unitary(fe.vectors, tau * fe.values) * linalg::spectral_unitary(ke.vectors, ke.values);
}

/// Fraction of the state's weight inside the permutation-symmetric subspace
/// of the sites. Symmetrizes by averaging over all site permutations, so only
/// usable for a handful of sites.
[[nodiscard]] inline double symmetric_overlap(const ProductSpace& space, const Eigen::VectorXcd& psi) {
    const int n = space.sites();
    if (n > 8) throw std::invalid_argument("symmetric_overlap: too many sites");
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(psi.size());
    long count = 0;
    std::vector<int> dig(static_cast<std::size_t>(n));
    do {
        for (long a = 0; a < space.dimension(); ++a) {
            for (int s = 0; s < n; ++s) dig[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])] = space.digit(a, s);
            long b = 0;
            for (int s = 0; s < n; ++s) b = b * space.dims()[static_cast<std::size_t>(s)] + dig[static_cast<std::size_t>(s)];
            acc[b] += psi[a];
        }
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    acc /= static_cast<double>(count);
    return acc.squaredNorm();
}

struct OracleRun {
    TrajectoryRecord record;
    double min_symmetric_overlap = 1.0;
};

/// Evolves the fully-up state with U = exp(-i H_free tau) exp(-i G) and
/// records (-1)^n <S^z>/N. With `track_symmetry` the overlap with the
/// symmetric subspace is tracked as well.
[[nodiscard]] inline OracleRun evolve(const FullModel& m, const ModelParams& p, long n_max, bool track_symmetry = false) {
    const Eigen::MatrixXcd u = full_floquet(m, p.tau);
    OracleRun out;
    out.record.meta = {"oracle", p, std::nullopt};
    Eigen::VectorXcd psi = m.initial.amplitudes;
    for (long n = 0;; ++n) {
        if (std::abs(psi.squaredNorm() - 1.0) > 1e-10) throw NumericalAbort("oracle: norm drift");
        const double sz = (psi.cwiseAbs2().array() * m.sz.array()).sum();
        out.record.push(n, order_parameter(n, sz, m.N));
        if (track_symmetry) out.min_symmetric_overlap = std::min(out.min_symmetric_overlap, symmetric_overlap(m.space, psi));
        if (n == n_max) break;
        psi = u * psi;
    }
    return out;
}

/// Model with spins of magnitude l, evolved from |l, ..., l>.
[[nodiscard]] inline TrajectoryRecord full_floquet_evolve(const ModelParams& p, long n_max) {
    return evolve(spin_model(p), p, n_max).record;
}

/// Same physics with every spin written as 2l Pauli spins.
[[nodiscard]] inline TrajectoryRecord pauli_floquet_evolve(const ModelParams& p, long n_max) {
    return evolve(pauli_model(p), p, n_max).record;
}

}  // namespace pdlab::oracle
