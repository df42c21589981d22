#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pdlab/fock.hpp"
#include "pdlab/linalg.hpp"
#include "pdlab/model.hpp"

namespace pdlab::floquet {

using linalg::cplx;

/// State vector over a FockBasis.
struct QuantumState {
    Eigen::VectorXcd amplitudes;

    [[nodiscard]] double norm_squared() const { return amplitudes.squaredNorm(); }

    /// All N bosons in mode m = +l, i.e. |l, ..., l>.
    [[nodiscard]] static QuantumState fully_up(const fock::FockBasis& basis) {
        QuantumState s{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()))};
        s.amplitudes[static_cast<Eigen::Index>(basis.fully_up_index())] = 1.0;
        return s;
    }
};

/// One-period Floquet unitary U = exp(-i H_free tau) exp(-i G_kick) with
/// G_kick = phi/2 Sigma - K/(8 N l) Sigma^2.
///
/// H_free and Sigma both commute with the mirror m -> -m, so the unitary is
/// stored factorized per parity block: eigenvectors of each generator in the
/// block and the phases they pick up. The dense matrix is materialized on
/// demand.
class FloquetOperator {
public:
    struct BlockFactor {
        fock::ParityBlock block;
        Eigen::MatrixXd free_vectors;
        Eigen::VectorXd free_phase;
        Eigen::MatrixXd kick_vectors;
        Eigen::VectorXd kick_phase;
    };

    FloquetOperator(const fock::FockBasis& basis, const ModelParams& params, std::vector<BlockFactor> blocks)
        : params_(params), dim_(basis.dimension()), sz_(fock::sz_diagonal(basis)), blocks_(std::move(blocks)) {}

    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] const Eigen::VectorXd& sz() const noexcept { return sz_; }
    [[nodiscard]] const std::vector<BlockFactor>& blocks() const noexcept { return blocks_; }

    [[nodiscard]] const BlockFactor* block(int sign) const {
        for (const auto& b : blocks_)
            if (b.block.sign() == sign) return &b;
        return nullptr;
    }

    /// U restricted to the block with the given mirror sign.
    [[nodiscard]] Eigen::MatrixXcd block_matrix(int sign) const {
        const auto* b = block(sign);
        if (b == nullptr) return {};
        return linalg::spectral_unitary(b->free_vectors, b->free_phase) *
               linalg::spectral_unitary(b->kick_vectors, b->kick_phase);
    }

    /// Dense U over the full Fock basis.
    [[nodiscard]] Eigen::MatrixXcd matrix() const {
        const auto d = static_cast<Eigen::Index>(dim_);
        Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
        for (const auto& b : blocks_) {
            const Eigen::MatrixXcd ub = linalg::spectral_unitary(b.free_vectors, b.free_phase) *
                                        linalg::spectral_unitary(b.kick_vectors, b.kick_phase);
            // U += B ub B^T, column by column.
            for (std::size_t c = 0; c < b.block.dimension(); ++c) {
                Eigen::VectorXcd col = Eigen::VectorXcd::Zero(d);
                b.block.embed_add(ub.col(static_cast<Eigen::Index>(c)), col);
                const auto& m = b.block.members()[c];
                if (m.first == m.second) {
                    u.col(static_cast<Eigen::Index>(m.first)) += col;
                } else {
                    constexpr double r = 0.70710678118654752440;
                    u.col(static_cast<Eigen::Index>(m.first)) += r * col;
                    u.col(static_cast<Eigen::Index>(m.second)) += static_cast<double>(b.block.sign()) * r * col;
                }
            }
        }
        return u;
    }

private:
    ModelParams params_;
    std::size_t dim_;
    Eigen::VectorXd sz_;
    std::vector<BlockFactor> blocks_;
};

namespace detail {

inline void check_orthogonal(const Eigen::MatrixXd& v, const char* what) {
    if (v.rows() == 0) return;
    Eigen::VectorXd x(v.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::cos(0.37 * static_cast<double>(i) + 0.1);
    const double err = (v.transpose() * (v * x) - x).cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff());
    if (!(err < 1e-10)) throw NumericalAbort(std::string("non-orthogonal eigenvectors for ") + what);
}

}  // namespace detail

/// Builds U from H_free and Sigma, block by mirror parity. Sigma is
/// diagonalized once and the kick phase phi/2 s - K/(8Nl) s^2 is applied to
/// its eigenvalues s.
[[nodiscard]] inline FloquetOperator build_floquet(const fock::FockBasis& basis, const ModelParams& params) {
    params.validate();
    if (basis.N() != params.N || basis.twice_l() != params.twice_l)
        throw std::invalid_argument("build_floquet: basis does not match parameters");
    const fock::SectorOperator sigma = fock::build_hopping(basis);
    const fock::SectorOperator hfree = fock::build_free_hamiltonian(basis, params, sigma);
    const fock::ParityBlocks blocks(basis);
    const double kick2 = params.K / (8.0 * params.N * params.l());

    std::vector<FloquetOperator::BlockFactor> factors;
    for (const fock::ParityBlock* blk : {&blocks.even, &blocks.odd}) {
        if (blk->dimension() == 0) continue;
        auto fe = linalg::symmetric_eigen(blk->project(hfree.matrix), "H_free block");
        auto ke = linalg::symmetric_eigen(blk->project(sigma.matrix), "Sigma block");
        detail::check_orthogonal(fe.vectors, "H_free");
        detail::check_orthogonal(ke.vectors, "Sigma");
        Eigen::VectorXd free_phase = params.tau * fe.values;
        Eigen::VectorXd kick_phase(ke.values.size());
        for (Eigen::Index k = 0; k < ke.values.size(); ++k) {
            const double s = ke.values[k];
            kick_phase[k] = 0.5 * params.phi * s - kick2 * s * s;
        }
        factors.push_back({*blk, std::move(fe.vectors), std::move(free_phase), std::move(ke.vectors), std::move(kick_phase)});
    }
    return FloquetOperator(basis, params, std::move(factors));
}

/// Evolves a state one period at a time, working in parity-block
/// coordinates with complex vectors stored as (re, im) column pairs.
class StroboscopicEvolver {
public:
    StroboscopicEvolver(const FloquetOperator& u, const QuantumState& psi0) : u_(&u) {
        if (static_cast<std::size_t>(psi0.amplitudes.size()) != u.dimension())
            throw std::invalid_argument("evolve: state dimension mismatch");
        for (const auto& b : u.blocks()) {
            const Eigen::VectorXcd y = b.block.restrict(psi0.amplitudes);
            Eigen::MatrixXd s(y.size(), 2);
            s.col(0) = y.real();
            s.col(1) = y.imag();
            parts_.push_back(std::move(s));
        }
    }

    void step() {
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            const auto& b = u_->blocks()[i];
            linalg::apply_spectral_phase(b.kick_vectors, b.kick_phase, parts_[i]);
            linalg::apply_spectral_phase(b.free_vectors, b.free_phase, parts_[i]);
        }
        ++n_;
    }

    [[nodiscard]] long index() const noexcept { return n_; }

    [[nodiscard]] QuantumState state() const {
        QuantumState s{Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(u_->dimension()))};
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            Eigen::VectorXcd y(parts_[i].rows());
            y.real() = parts_[i].col(0);
            y.imag() = parts_[i].col(1);
            u_->blocks()[i].block.embed_add(y, s.amplitudes);
        }
        return s;
    }

    [[nodiscard]] double norm_squared() const {
        double acc = 0.0;
        for (const auto& p : parts_) acc += p.squaredNorm();
        return acc;
    }

    /// <S^z> of the current state.
    [[nodiscard]] double sz_expectation() const {
        const auto psi = state();
        return (psi.amplitudes.cwiseAbs2().array() * u_->sz().array()).sum();
    }

private:
    const FloquetOperator* u_;
    std::vector<Eigen::MatrixXd> parts_;
    long n_ = 0;
};

inline constexpr double norm_drift_limit = 1e-8;

/// Order parameter (-1)^n <S^z>/N for n = 0..n_max. With
/// `stop_at_first_zero` the record ends at the first non-positive value.
[[nodiscard]] inline TrajectoryRecord evolve_stroboscopic(const FloquetOperator& u, const QuantumState& psi0, long n_max,
                                                          bool stop_at_first_zero = false) {
    if (n_max < 0) throw std::invalid_argument("evolve_stroboscopic: n_max must be >= 0");
    if (std::abs(psi0.norm_squared() - 1.0) > 1e-10)
        throw std::invalid_argument("evolve_stroboscopic: initial state not normalized");
    TrajectoryRecord rec;
    rec.meta = {"ed", u.params(), std::nullopt};
    StroboscopicEvolver ev(u, psi0);
    for (long n = 0;; ++n) {
        if (std::abs(ev.norm_squared() - 1.0) > norm_drift_limit)
            throw NumericalAbort("ed: state norm drifted at n=" + std::to_string(n));
        const double o = order_parameter(n, ev.sz_expectation(), u.params().N);
        rec.push(n, o);
        if (n == n_max || (stop_at_first_zero && o <= 0.0)) break;
        ev.step();
    }
    return rec;
}

/// First stroboscopic index with value <= 0, or nullopt within the horizon.
[[nodiscard]] inline std::optional<long> first_zero(const TrajectoryRecord& rec) {
    if (rec.values.empty()) throw std::invalid_argument("first_zero: empty record");
    for (std::size_t i = 0; i < rec.values.size(); ++i)
        if (rec.values[i] <= 0.0) return rec.times[i];
    return std::nullopt;
}

inline constexpr double degenerate_gap = 1e-12;

/// Mean adjacent-gap ratio of a set of eigenphases on (-pi, pi]. Gaps are
/// taken between sorted neighbours without the wrap-around gap; gaps below
/// 1e-12 are dropped.
[[nodiscard]] inline double level_spacing_ratio(std::vector<double> phases) {
    if (phases.size() < 10) throw std::invalid_argument("level_spacing_ratio: fewer than 10 levels");
    std::sort(phases.begin(), phases.end());
    std::vector<double> gaps;
    gaps.reserve(phases.size());
    for (std::size_t a = 0; a + 1 < phases.size(); ++a) {
        const double g = phases[a + 1] - phases[a];
        if (g >= degenerate_gap) gaps.push_back(g);
    }
    if (gaps.size() < 2) throw std::invalid_argument("level_spacing_ratio: spectrum fully degenerate");
    double acc = 0.0;
    for (std::size_t a = 0; a + 1 < gaps.size(); ++a)
        acc += std::min(gaps[a], gaps[a + 1]) / std::max(gaps[a], gaps[a + 1]);
    return acc / static_cast<double>(gaps.size() - 1);
}

/// Quasi-energies mu*tau = -arg(lambda) of a unitary, on (-pi, pi].
[[nodiscard]] inline std::vector<double> quasienergy_phases(const Eigen::MatrixXcd& u) {
    auto ph = linalg::unitary_eigenphases(u);
    for (auto& x : ph) {
        x = -x;
        if (x <= -std::numbers::pi) x += 2.0 * std::numbers::pi;
    }
    return ph;
}

/// r in the mirror-even sector of a dense U. The parity operator is the
/// permutation matrix from fock::build_parity.
[[nodiscard]] inline double level_spacing_ratio(const Eigen::MatrixXcd& u, const fock::SectorOperator& parity) {
    const Eigen::MatrixXcd p = parity.matrix.cast<cplx>();
    const double comm = (u * p - p * u).cwiseAbs().maxCoeff();
    if (!(comm < 1e-8)) throw std::invalid_argument("level_spacing_ratio: U does not commute with parity");
    const fock::ParityBlock even(fock::mirror_from_parity(parity), 1);
    if (even.dimension() < 10) throw std::invalid_argument("level_spacing_ratio: even sector dimension < 10");
    return level_spacing_ratio(quasienergy_phases(even.project(u)));
}

/// r in the mirror-even sector, using the block factorization directly.
[[nodiscard]] inline double level_spacing_ratio_even(const FloquetOperator& u) {
    const auto* b = u.block(1);
    if (b == nullptr || b->block.dimension() < 10)
        throw std::invalid_argument("level_spacing_ratio: even sector dimension < 10");
    return level_spacing_ratio(quasienergy_phases(u.block_matrix(1)));
}

/// One eigenspace of the one-body mirror Q inside the mirror-even block.
struct MirrorSector {
    int n_odd;              // bosons in mirror-odd orbitals
    std::size_t dimension;
    std::optional<double> r;  // empty below 10 levels
};

/// r in each joint eigenspace of the many-body mirror (even) and the
/// one-body mirror Q. Q is conserved, so the even block is reducible and its
/// spectrum is a superposition of independent sectors.
[[nodiscard]] inline std::vector<MirrorSector> level_spacing_ratio_by_sector(const FloquetOperator& u,
                                                                             const fock::FockBasis& basis) {
    const auto* b = u.block(1);
    if (b == nullptr) throw std::invalid_argument("level_spacing_ratio_by_sector: no even block");
    const Eigen::MatrixXd q = b->block.project(fock::build_mirror_hopping(basis));
    const auto qe = linalg::symmetric_eigen(q, "one-body mirror");
    const Eigen::MatrixXcd ub = u.block_matrix(1);
    std::vector<MirrorSector> out;
    Eigen::Index start = 0;
    const Eigen::Index n = qe.values.size();
    while (start < n) {
        const double q0 = std::nearbyint(qe.values[start]);
        Eigen::Index end = start;
        while (end < n && std::abs(qe.values[end] - q0) < 0.5) ++end;
        const Eigen::MatrixXcd v = qe.vectors.middleCols(start, end - start).cast<cplx>();
        const Eigen::MatrixXcd us = v.adjoint() * ub * v;
        MirrorSector s{static_cast<int>(std::lround((basis.N() - q0) / 2.0)), static_cast<std::size_t>(end - start), std::nullopt};
        if (s.dimension >= 10) s.r = level_spacing_ratio(quasienergy_phases(us));
        out.push_back(s);
        start = end;
    }
    return out;
}

/// r over the superposed spectrum of both parity blocks.
[[nodiscard]] inline double level_spacing_ratio_full(const FloquetOperator& u) {
    std::vector<double> all;
    for (int sign : {1, -1}) {
        if (u.block(sign) == nullptr) continue;
        const auto ph = quasienergy_phases(u.block_matrix(sign));
        all.insert(all.end(), ph.begin(), ph.end());
    }
    return level_spacing_ratio(std::move(all));
}

}  // namespace pdlab::floquet
