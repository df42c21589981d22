#include <gtest/gtest.h>

#include <numbers>

#include "pdlab/dtwa.hpp"
#include "pdlab/io.hpp"

using namespace pdlab;
using namespace pdlab::dtwa;

namespace {

ModelParams params(int N, int twice_l, double h = 0.1) {
    ModelParams p;
    p.N = N;
    p.twice_l = twice_l;
    p.h = h;
    return p;
}

// Energy of the grouped spin-1/2 model evaluated on classical vectors; the
// oracles below take gradients of these by central differences, which are
// exact for quadratic functions up to roundoff.
double free_energy(const SpinConfiguration& c, const ModelParams& p) {
    double e = 0.0;
    for (int j = 0; j < c.N; ++j)
        for (int m = 0; m < c.twice_l; ++m) {
            e -= p.h * c.at(j, m).x();
            for (int q = 0; q < c.twice_l; ++q)
                if (q != m) e -= (p.J / (4.0 * p.l())) * c.at(j, m).z() * c.at(j, q).z();
        }
    return e;
}

double kick_energy(const SpinConfiguration& c, const ModelParams& p) {
    double e = 0.0;
    for (int j = 0; j < c.N; ++j)
        for (int m = 0; m < c.twice_l; ++m) {
            e += 0.5 * p.phi * c.at(j, m).x();
            for (int i = 0; i < c.N; ++i)
                if (i != j)
                    for (int q = 0; q < c.twice_l; ++q)
                        e -= (p.K / (16.0 * p.N * p.l())) * c.at(j, m).x() * c.at(i, q).x();
        }
    return e;
}

template <class E>
std::vector<Vec3> rates(const SpinConfiguration& c, E&& energy, double scale) {
    std::vector<Vec3> out(c.spins.size());
    SpinConfiguration w = c;
    const double d = 1e-3;
    for (std::size_t a = 0; a < c.spins.size(); ++a) {
        Vec3 grad;
        for (int k = 0; k < 3; ++k) {
            w.spins[a][k] = c.spins[a][k] + d;
            const double ep = energy(w);
            w.spins[a][k] = c.spins[a][k] - d;
            const double em = energy(w);
            w.spins[a][k] = c.spins[a][k];
            grad[k] = (ep - em) / (2.0 * d);
        }
        out[a] = (2.0 * scale * grad).cross(c.spins[a]);
    }
    return out;
}

template <class E>
SpinConfiguration integrate(SpinConfiguration c, E&& energy, double scale, double t, int steps) {
    const double dt = t / steps;
    auto shifted = [&](const SpinConfiguration& base, const std::vector<Vec3>& k, double f) {
        SpinConfiguration s = base;
        for (std::size_t a = 0; a < s.spins.size(); ++a) s.spins[a] += f * k[a];
        return s;
    };
    for (int i = 0; i < steps; ++i) {
        const auto k1 = rates(c, energy, scale);
        const auto k2 = rates(shifted(c, k1, 0.5 * dt), energy, scale);
        const auto k3 = rates(shifted(c, k2, 0.5 * dt), energy, scale);
        const auto k4 = rates(shifted(c, k3, dt), energy, scale);
        for (std::size_t a = 0; a < c.spins.size(); ++a) c.spins[a] += (dt / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    }
    return c;
}

SpinConfiguration generic(int N, int twice_l) {
    SpinConfiguration c{N, twice_l, {}};
    for (int a = 0; a < N * twice_l; ++a) c.spins.emplace_back(std::cos(0.7 * a + 0.1), std::sin(1.3 * a), 1.0 - 0.1 * a);
    return c;
}

double max_diff(const SpinConfiguration& a, const SpinConfiguration& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.spins.size(); ++i) d = std::max(d, (a.spins[i] - b.spins[i]).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace

TEST(DtwaSampling, PhasePoints) {
    StreamRng rng(5, 0);
    const auto c = sample_initial(10, 3, rng);
    ASSERT_EQ(c.spins.size(), 30u);
    for (const auto& s : c.spins) {
        EXPECT_EQ(s.z(), 1.0);
        EXPECT_EQ(std::abs(s.x()), 1.0);
        EXPECT_EQ(s.x(), s.y());
    }
    StreamRng again(5, 0);
    const auto d = sample_initial(10, 3, again);
    for (std::size_t i = 0; i < c.spins.size(); ++i) EXPECT_EQ(c.spins[i], d.spins[i]);
}

TEST(DtwaSampling, UnbiasedTransverseComponents) {
    const int N = 20, L = 3, draws = 800;
    double acc = 0.0;
    for (int r = 0; r < draws; ++r) {
        StreamRng rng(9, static_cast<std::uint64_t>(r));
        acc += sample_initial(N, L, rng).total_sx();
    }
    const double count = static_cast<double>(draws) * N * L;
    EXPECT_LT(std::abs(acc / count), 3.0 / std::sqrt(count));
}

TEST(DtwaFree, NoInteractionKeepsSx) {
    ModelParams p = params(3, 2);
    p.J = 0.0;
    auto c = generic(3, 2);
    const auto c0 = c;
    for (int i = 0; i < 100; ++i) c = dtwa_free_step(c, p, 0.01);
    for (std::size_t a = 0; a < c.spins.size(); ++a) {
        EXPECT_NEAR(c.spins[a].x(), c0.spins[a].x(), 1e-14);
        EXPECT_NEAR(c.spins[a].tail<2>().norm(), c0.spins[a].tail<2>().norm(), 1e-9);
    }
}

TEST(DtwaFree, NoFieldKeepsSz) {
    ModelParams p = params(3, 4, 0.0);
    auto c = generic(3, 4);
    const auto c0 = c;
    for (int i = 0; i < 100; ++i) c = dtwa_free_step(c, p, 0.01);
    for (std::size_t a = 0; a < c.spins.size(); ++a) EXPECT_EQ(c.spins[a].z(), c0.spins[a].z());
}

TEST(DtwaFree, MatchesFineStepOracle) {
    ModelParams p = params(1, 2, 0.2);
    StreamRng rng(3, 0);
    for (int draw = 0; draw < 3; ++draw) {
        const auto c0 = sample_initial(1, 2, rng);
        auto coarse = c0;
        auto fine = c0;
        const int steps = 1000;
        for (int n = 0; n < 10; ++n) {
            coarse = dtwa_kick(coarse, p);
            for (int s = 0; s < steps; ++s) coarse = dtwa_free_step(coarse, p, p.tau / steps);
            // Single site: the kick is a bare phi rotation.
            for (auto& s : fine.spins) {
                const double y = s.y(), z = s.z();
                s.y() = y * std::cos(p.phi) - z * std::sin(p.phi);
                s.z() = z * std::cos(p.phi) + y * std::sin(p.phi);
            }
            fine = integrate(fine, [&](const SpinConfiguration& c) { return free_energy(c, p); }, 1.0, p.tau, 100 * steps);
        }
        EXPECT_LT(max_diff(coarse, fine), 1e-8);
    }
}

TEST(DtwaFree, SelfTermSwitch) {
    ModelParams p = params(2, 3);
    const auto c = generic(2, 3);
    const auto a = dtwa_free_step(c, p, 0.05, false);
    const auto b = dtwa_free_step(c, p, 0.05, true);
    EXPECT_GT(max_diff(a, b), 1e-6);
    // Oracle of the energy without m = m' terms reproduces the default.
    const auto ref = integrate(c, [&](const SpinConfiguration& x) { return free_energy(x, p); }, 1.0, 0.05, 1);
    EXPECT_LT(max_diff(a, ref), 1e-9);
}

TEST(DtwaKick, PerfectFlipAndQuarterTurn) {
    ModelParams p = params(4, 3);
    p.K = 0.0;
    const auto c = generic(4, 3);
    const auto f = dtwa_kick(c, p);
    for (std::size_t a = 0; a < c.spins.size(); ++a) {
        EXPECT_EQ(f.spins[a].z(), -c.spins[a].z());
        EXPECT_EQ(f.spins[a].x(), c.spins[a].x());
    }
    p.phi = std::numbers::pi / 2;
    const auto q = dtwa_kick(c, p);
    for (std::size_t a = 0; a < c.spins.size(); ++a) {
        EXPECT_EQ(q.spins[a].z(), c.spins[a].y());
        EXPECT_EQ(q.spins[a].y(), -c.spins[a].z());
    }
    // Same sign from the smoothed kick.
    const double eps = 1e-4 * p.tau;
    const auto smooth = integrate(c, [&](const SpinConfiguration& x) { return kick_energy(x, p); }, 1.0 / eps, eps, 400);
    EXPECT_LT(max_diff(q, smooth), 1e-6);
}

TEST(DtwaKick, MatchesSmoothedDeltaWithCoupling) {
    for (int L : {1, 3}) {
        ModelParams p = params(2, L);
        p.K = 1.3;
        p.phi = 2.8;
        const auto c = generic(2, L);
        const double eps = 1e-4 * p.tau;
        const auto smooth = integrate(c, [&](const SpinConfiguration& x) { return kick_energy(x, p); }, 1.0 / eps, eps, 400);
        EXPECT_LT(max_diff(dtwa_kick(c, p), smooth), 1e-6);
    }
}

TEST(DtwaCompressed, ExpandReproducesSample) {
    StreamRng rng(2, 1);
    const auto c = sample_initial(9, 4, rng);
    const CompressedConfiguration cc(c);
    EXPECT_DOUBLE_EQ(cc.total_sz(), c.total_sz());
    long sites = 0;
    for (const auto& k : cc.classes()) sites += k.sites;
    EXPECT_EQ(sites, 9);
    const auto e = cc.expand();
    EXPECT_DOUBLE_EQ(e.total_sx(), c.total_sx());
}

TEST(DtwaCompressed, EquivalentToFullEngine) {
    for (int L : {1, 2, 3, 5}) {
        ModelParams p = params(7, L, 0.2);
        for (std::uint64_t r = 0; r < 3; ++r) {
            StreamRng rng(17, r);
            const auto c = sample_initial(p.N, L, rng);
            const auto full = full_trajectory(c, p, 20, 64);
            const auto comp = compressed_trajectory(CompressedConfiguration(c), p, 20, 64);
            ASSERT_EQ(full.size(), comp.size());
            for (std::size_t i = 0; i < full.size(); ++i) ASSERT_NEAR(full[i], comp[i], 1e-11) << "L=" << L << " n=" << i;
            const auto fs = full_trajectory(c, p, 5, 64, true);
            const auto cs = compressed_trajectory(CompressedConfiguration(c), p, 5, 64, true);
            for (std::size_t i = 0; i < fs.size(); ++i) ASSERT_NEAR(fs[i], cs[i], 1e-11);
        }
    }
}

TEST(DtwaEstimate, PerfectFlipIsExact) {
    ModelParams p = params(10, 3, 0.0);
    p.K = 0.0;
    DtwaOptions opt;
    opt.n_r = 16;
    opt.steps = 20;
    const auto rec = dtwa_order_parameter(p, 100, opt);
    for (std::size_t i = 0; i < rec.size(); ++i) {
        ASSERT_EQ(rec.values[i], 1.0);
        ASSERT_EQ(rec.errors[i], 0.0);
    }
}

TEST(DtwaEstimate, BitIdenticalAcrossWorkers) {
    const ModelParams p = params(12, 3, 0.2);
    DtwaOptions opt;
    opt.n_r = 61;
    opt.steps = 32;
    std::string ref;
    for (unsigned w : {1u, 3u, 8u}) {
        opt.workers = w;
        const auto rec = dtwa_order_parameter(p, 30, opt);
        io::CsvTable t({"n", "O_over_l", "err"});
        for (std::size_t i = 0; i < rec.size(); ++i) t.row({static_cast<double>(rec.times[i]), rec.values[i], rec.errors[i]});
        if (ref.empty()) ref = t.str();
        EXPECT_EQ(t.str(), ref) << "workers=" << w;
    }
}

TEST(DtwaEstimate, SeedChangesSample) {
    const ModelParams p = params(6, 2, 0.2);
    DtwaOptions a;
    a.n_r = 8;
    a.steps = 16;
    DtwaOptions b = a;
    b.seed = 2;
    EXPECT_NE(dtwa_order_parameter(p, 10, a).values.back(), dtwa_order_parameter(p, 10, b).values.back());
}

TEST(DtwaEstimate, RejectsBadOptions) {
    DtwaOptions opt;
    opt.n_r = 1;
    EXPECT_THROW((void)dtwa_order_parameter(params(2, 2), 3, opt), std::invalid_argument);
    opt.n_r = 4;
    opt.steps = 0;
    EXPECT_THROW((void)dtwa_order_parameter(params(2, 2), 3, opt), std::invalid_argument);
}

TEST(DtwaSteps, SelectionConverges) {
    const auto sel = select_steps(params(10, 3, 0.2), 1);
    EXPECT_LT(sel.deviation, 1e-8);
    EXPECT_GE(sel.steps, 16);
    EXPECT_LE(sel.steps, 4096);
}
