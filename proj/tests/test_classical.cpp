#include <gtest/gtest.h>

#include "pdlab/classical.hpp"

using namespace pdlab;
using namespace pdlab::classical;

namespace {

ModelParams params(int N) {
    ModelParams p;
    p.N = N;
    return p;
}

// Kick spread over a top-hat: H = (1/eps)[phi sum m^x - (K/2N) sum_{i != j} m^x_i m^x_j],
// dm/dt = grad H x m.
std::vector<Vec3> smoothed_kick(std::vector<Vec3> m, const ModelParams& p, int steps) {
    const double eps = 1e-4 * p.tau;
    const double dt = eps / steps;
    const auto n = m.size();
    auto rate = [&](const std::vector<Vec3>& s) {
        double total = 0.0;
        for (const auto& v : s) total += v.x();
        std::vector<Vec3> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            const Vec3 grad((p.phi - (p.K / p.N) * (total - s[j].x())) / eps, 0.0, 0.0);
            out[j] = grad.cross(s[j]);
        }
        return out;
    };
    auto add = [&](const std::vector<Vec3>& a, const std::vector<Vec3>& k, double f) {
        std::vector<Vec3> out = a;
        for (std::size_t j = 0; j < n; ++j) out[j] += f * k[j];
        return out;
    };
    for (int s = 0; s < steps; ++s) {
        const auto k1 = rate(m);
        const auto k2 = rate(add(m, k1, 0.5 * dt));
        const auto k3 = rate(add(m, k2, 0.5 * dt));
        const auto k4 = rate(add(m, k3, dt));
        for (std::size_t j = 0; j < n; ++j) m[j] += (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return m;
}

ClassicalConfiguration generic(int N) {
    ClassicalConfiguration c;
    for (int j = 0; j < N; ++j) c.momenta.push_back(0.5 * Vec3(std::cos(0.8 * j), std::sin(0.8 * j) * 0.6, 0.8).normalized());
    return c;
}

}  // namespace

TEST(Classical, PerfectFlip) {
    ModelParams p = params(5);
    p.K = 0.0;
    p.h = 0.0;
    const auto rec = classical_trajectory(p, 100);
    for (double v : rec.values) ASSERT_NEAR(v, 1.0, 1e-10);
}

TEST(Classical, FreeFlowConservesLengthAndEnergy) {
    ModelParams p = params(3);
    auto c = generic(3);
    auto energy = [&](const ClassicalConfiguration& x) {
        double e = 0.0;
        for (const auto& m : x.momenta) e += -2.0 * p.J * m.z() * m.z() - 2.0 * p.h * m.x();
        return e;
    };
    const double e0 = energy(c);
    for (int i = 0; i < 1000; ++i) free_step(c, p, p.tau / 1000);
    EXPECT_LT(c.max_norm_drift(), 1e-12);
    EXPECT_NEAR(energy(c), e0, 1e-12);
}

TEST(Classical, KickMatchesSmoothedDelta) {
    ModelParams p = params(4);
    p.K = 1.7;
    p.phi = 2.6;
    auto c = generic(4);
    const auto smooth = smoothed_kick(c.momenta, p, 400);
    kick(c, p);
    for (std::size_t j = 0; j < smooth.size(); ++j) EXPECT_LT((c.momenta[j] - smooth[j]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Classical, PersistsAtWeakField) {
    const auto rec = classical_trajectory(params(50), 4000);
    for (double v : rec.values) ASSERT_GT(v, 0.0);
}

TEST(Classical, RejectsBadInput) {
    EXPECT_THROW((void)ClassicalConfiguration::fully_up(0), std::invalid_argument);
    EXPECT_THROW((void)classical_trajectory(params(2), -1), std::invalid_argument);
    EXPECT_THROW((void)classical_trajectory(params(2), 5, 0), std::invalid_argument);
}

TEST(Classical, CoarseStepsAbort) {
    ModelParams p = params(2);
    p.J = 5.0;
    EXPECT_THROW((void)classical_trajectory(p, 500, 2), NumericalAbort);
}
