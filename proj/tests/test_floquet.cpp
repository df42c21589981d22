#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "pdlab/floquet.hpp"
#include "pdlab/oracle.hpp"

using namespace pdlab;
using namespace pdlab::floquet;
using pdlab::linalg::cplx;

namespace {

ModelParams model_point(int N, int twice_l) {
    ModelParams p;
    p.N = N;
    p.twice_l = twice_l;
    return p;
}

double max_dev(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    EXPECT_EQ(a.size(), b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
    return d;
}

// Columns: symmetrized product states, one per Fock state, built directly
// from occupation numbers on the product space of N sites.
Eigen::MatrixXd symmetric_embedding(const fock::FockBasis& b) {
    const int N = b.N();
    const int d = b.modes();
    long dim = 1;
    for (int j = 0; j < N; ++j) dim *= d;
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(b.dimension()));
    for (long a = 0; a < dim; ++a) {
        std::vector<int> occ(static_cast<std::size_t>(d), 0);
        long x = a;
        for (int j = 0; j < N; ++j) {
            ++occ[static_cast<std::size_t>(x % d)];
            x /= d;
        }
        e(a, static_cast<Eigen::Index>(*b.index_of(occ))) = 1.0;
    }
    for (Eigen::Index c = 0; c < e.cols(); ++c) e.col(c).normalize();
    return e;
}

Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& gen) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd z(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) z(r, c) = cplx(g(gen), g(gen));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd rr = qr.matrixQR();
    for (int k = 0; k < n; ++k) q.col(k) *= rr(k, k) / std::abs(rr(k, k));
    return q;
}

}  // namespace

TEST(Floquet, UnitaryAndNormPreserving) {
    const auto p = model_point(6, 3);
    const fock::FockBasis b(p.N, p.twice_l);
    const auto u = build_floquet(b, p);
    EXPECT_LT(linalg::unitarity_error(u.matrix()), 1e-10);
    StroboscopicEvolver ev(u, QuantumState::fully_up(b));
    for (int n = 0; n < 50; ++n) {
        ev.step();
        ASSERT_NEAR(ev.norm_squared(), 1.0, 1e-10);
    }
}

TEST(Floquet, PerfectFlip) {
    for (int tl : {1, 2, 3}) {
        ModelParams p = model_point(5, tl);
        p.K = 0.0;
        p.h = 0.0;
        const fock::FockBasis b(p.N, p.twice_l);
        const auto rec = evolve_stroboscopic(build_floquet(b, p), QuantumState::fully_up(b), 100);
        for (double v : rec.values) ASSERT_NEAR(v, p.l(), 1e-10);
    }
}

TEST(Floquet, FlipMirrorsAnyPopulation) {
    ModelParams p = model_point(3, 2);
    p.K = 0.0;
    p.h = 0.0;
    p.J = 0.7;
    const fock::FockBasis b(p.N, p.twice_l);
    const auto u = build_floquet(b, p).matrix();
    const auto z = fock::sz_diagonal(b);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(b.dimension()));
    psi.normalize();
    const double before = (psi.cwiseAbs2().array() * z.array()).sum();
    const Eigen::VectorXcd after = u * psi;
    EXPECT_NEAR((after.cwiseAbs2().array() * z.array()).sum(), -before, 1e-12);
}

TEST(Floquet, NoKickIsFreeEvolution) {
    ModelParams p = model_point(4, 2);
    p.phi = 0.0;
    p.K = 0.0;
    const fock::FockBasis b(p.N, p.twice_l);
    const auto u = build_floquet(b, p).matrix();
    const auto h = fock::build_free_hamiltonian(b, p).matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXcd ph = (-cplx(0, 1) * p.tau * es.eigenvalues().cast<cplx>()).array().exp();
    const Eigen::MatrixXcd ref = es.eigenvectors().cast<cplx>() * ph.asDiagonal() * es.eigenvectors().transpose().cast<cplx>();
    EXPECT_LT((u - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Floquet, SingleRecordPoint) {
    const auto p = model_point(3, 2);
    const fock::FockBasis b(p.N, p.twice_l);
    const auto rec = evolve_stroboscopic(build_floquet(b, p), QuantumState::fully_up(b), 0);
    ASSERT_EQ(rec.size(), 1u);
    EXPECT_DOUBLE_EQ(rec.values[0], 1.0);
}

TEST(Floquet, MatchesProjectedOracleUnitary) {
    const auto p = model_point(2, 2);
    const fock::FockBasis b(p.N, p.twice_l);
    const Eigen::MatrixXcd u = build_floquet(b, p).matrix();
    const auto m = oracle::spin_model(p);
    const Eigen::MatrixXcd full = oracle::full_floquet(m, p.tau);
    const Eigen::MatrixXcd e = symmetric_embedding(b).cast<cplx>();
    EXPECT_LT((e.adjoint() * full * e - u).cwiseAbs().maxCoeff(), 1e-10);
    // The symmetric subspace is invariant.
    EXPECT_LT((full * e - e * (e.adjoint() * full * e)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Floquet, OracleTrajectoryDefaultPoint) {
    const auto p = model_point(2, 2);
    const fock::FockBasis b(p.N, p.twice_l);
    const auto ed = evolve_stroboscopic(build_floquet(b, p), QuantumState::fully_up(b), 200);
    EXPECT_LT(max_dev(ed, oracle::full_floquet_evolve(p, 200)), 1e-10);
}

TEST(Floquet, OracleTrajectoryHalfIntegerSpin) {
    ModelParams p = model_point(3, 3);
    p.K = 1.1;
    p.h = 0.23;
    p.phi = 2.9;
    const fock::FockBasis b(p.N, p.twice_l);
    const auto ed = evolve_stroboscopic(build_floquet(b, p), QuantumState::fully_up(b), 60);
    EXPECT_LT(max_dev(ed, oracle::full_floquet_evolve(p, 60)), 1e-10);
}

TEST(Oracle, StaysInSymmetricSubspace) {
    const auto p = model_point(3, 2);
    const auto run = oracle::evolve(oracle::spin_model(p), p, 20, true);
    EXPECT_GT(run.min_symmetric_overlap, 1.0 - 1e-10);
}

TEST(Oracle, SingleSpinHalfFlip) {
    ModelParams p = model_point(1, 1);
    p.K = 0.0;
    p.h = 0.0;
    const auto rec = oracle::full_floquet_evolve(p, 30);
    for (double v : rec.values) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Oracle, PauliGroupingEqualsSpinModelWithHalvedCoupling) {
    // At l = 1/2 the grouped form drops the i = j terms and carries half the
    // collective coupling of the spin form.
    ModelParams p = model_point(2, 1);
    p.K = 0.8;
    ModelParams half = p;
    half.K = 0.4;
    EXPECT_LT(max_dev(oracle::pauli_floquet_evolve(p, 100), oracle::full_floquet_evolve(half, 100)), 1e-12);
}

TEST(Oracle, PauliGroupingDecouplesWithoutKickInteraction) {
    ModelParams p = model_point(2, 2);
    p.K = 0.0;
    EXPECT_LT(max_dev(oracle::pauli_floquet_evolve(p, 50), oracle::full_floquet_evolve(p, 50)), 1e-12);
}

TEST(FirstZero, Conventions) {
    TrajectoryRecord r;
    for (double v : {1.0, 0.5, -0.1, 0.3}) r.push(static_cast<long>(r.size()), v);
    EXPECT_EQ(first_zero(r), 2);
    TrajectoryRecord pos;
    for (double v : {1.0, 0.5}) pos.push(static_cast<long>(pos.size()), v);
    EXPECT_FALSE(first_zero(pos).has_value());
    TrajectoryRecord edge;
    for (double v : {1.0, 0.0, -1.0}) edge.push(static_cast<long>(edge.size()), v);
    EXPECT_EQ(first_zero(edge), 1);
    EXPECT_THROW((void)first_zero(TrajectoryRecord{}), std::invalid_argument);
}

TEST(LevelStatistics, PoissonEnsemble) {
    std::mt19937_64 gen(7);
    std::exponential_distribution<double> gap(1.0);
    double acc = 0.0;
    const int realizations = 100;
    for (int r = 0; r < realizations; ++r) {
        std::vector<double> levels;
        double x = 0.0;
        for (int k = 0; k < 1000; ++k) levels.push_back(x += gap(gen));
        acc += level_spacing_ratio(levels);
    }
    EXPECT_NEAR(acc / realizations, 0.386, 0.01);
}

TEST(LevelStatistics, CircularOrthogonalEnsemble) {
    std::mt19937_64 gen(11);
    double acc = 0.0;
    const int realizations = 100;
    for (int r = 0; r < realizations; ++r) {
        const Eigen::MatrixXcd w = haar_unitary(100, gen);
        acc += level_spacing_ratio(quasienergy_phases(w.transpose() * w));
    }
    EXPECT_NEAR(acc / realizations, 0.5269, 0.01);
}

TEST(LevelStatistics, RejectsTinySpectra) {
    EXPECT_THROW((void)level_spacing_ratio(std::vector<double>{0.1, 0.2, 0.3}), std::invalid_argument);
    EXPECT_THROW((void)level_spacing_ratio(std::vector<double>(20, 0.5)), std::invalid_argument);
}

TEST(LevelStatistics, EvenSectorRoutesAgree) {
    ModelParams p = model_point(8, 4);
    p.K = 3.0;
    const fock::FockBasis b(p.N, p.twice_l);
    const auto u = build_floquet(b, p);
    EXPECT_NEAR(level_spacing_ratio(u.matrix(), fock::build_parity(b)), level_spacing_ratio_even(u), 1e-9);
}

TEST(LevelStatistics, MirrorHoppingCommutesWithFloquet) {
    ModelParams p = model_point(6, 4);
    p.K = 3.0;
    const fock::FockBasis b(p.N, p.twice_l);
    const Eigen::MatrixXcd u = build_floquet(b, p).matrix();
    const Eigen::MatrixXcd q = fock::build_mirror_hopping(b).cast<cplx>();
    EXPECT_LT((u * q - q * u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LevelStatistics, SectorsPartitionEvenBlock) {
    ModelParams p = model_point(10, 4);
    p.K = 3.0;
    const fock::FockBasis b(p.N, p.twice_l);
    const auto u = build_floquet(b, p);
    const auto sectors = level_spacing_ratio_by_sector(u, b);
    std::size_t total = 0;
    for (const auto& s : sectors) {
        total += s.dimension;
        EXPECT_GE(s.n_odd, 0);
        EXPECT_LE(s.n_odd, p.N);
        EXPECT_EQ(s.n_odd % 2, 0);
    }
    EXPECT_EQ(total, u.block(1)->block.dimension());
    EXPECT_GT(sectors.size(), 1u);
}
