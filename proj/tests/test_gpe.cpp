#include <gtest/gtest.h>

#include <numbers>

#include "pdlab/analysis.hpp"
#include "pdlab/gpe.hpp"

using namespace pdlab;
using namespace pdlab::gpe;
using pdlab::linalg::cplx;

namespace {

ModelParams model_point(int twice_l) {
    ModelParams p;
    p.twice_l = twice_l;
    p.N = 1;
    return p;
}

// Kick spread over a top-hat of width eps: i d(beta)/dt = (g(beta)/eps) M beta
// with g = phi/2 - (K/2l) sigma(beta), integrated by plain RK4.
Eigen::VectorXcd smoothed_kick(const ModelParams& p, Eigen::VectorXcd b, int steps) {
    const int n = p.modes();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) m(k, k + 1) = m(k + 1, k) = fock::hop_amplitude(p.twice_l, k);
    const double eps = 1e-4 * p.tau;
    const double dt = eps / steps;
    auto rate = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
        const double g = 0.5 * p.phi - (p.K / (2.0 * p.l())) * kick_coherence(x);
        return cplx(0, -1) * (g / eps) * (m.cast<cplx>() * x);
    };
    for (int s = 0; s < steps; ++s) {
        const Eigen::VectorXcd k1 = rate(b);
        const Eigen::VectorXcd k2 = rate(b + 0.5 * dt * k1);
        const Eigen::VectorXcd k3 = rate(b + 0.5 * dt * k2);
        const Eigen::VectorXcd k4 = rate(b + dt * k3);
        b += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return b;
}

Eigen::VectorXcd generic_state(int twice_l) {
    Eigen::VectorXcd b(twice_l + 1);
    for (int k = 0; k <= twice_l; ++k) b[k] = cplx(std::cos(0.9 * k + 0.3), std::sin(1.7 * k - 0.2));
    return b.normalized();
}

}  // namespace

TEST(GpeState, Constructors) {
    const auto up = GpeState::fully_up(2);
    EXPECT_DOUBLE_EQ(up.sz(), 1.0);
    EXPECT_DOUBLE_EQ(up.norm_squared(), 1.0);
    const auto pert = GpeState::perturbed(2, 0.1);
    EXPECT_NEAR(pert.norm_squared(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(std::abs(pert.beta[1]), 0.1);
    EXPECT_THROW((void)GpeState::perturbed(2, 1.5), std::invalid_argument);
}

TEST(GpeFree, DiagonalFlowPhases) {
    ModelParams p = model_point(4);
    p.h = 0.0;
    const auto b0 = generic_state(4);
    const double dt = 1e-3;
    GpeState s{b0};
    for (int i = 0; i < 600; ++i) s = gpe_free_step(s, p, dt);
    for (int k = 0; k <= 4; ++k) {
        const double m = k - p.l();
        const cplx ref = b0[k] * std::polar(1.0, (p.J / p.l()) * m * m * 600 * dt);
        EXPECT_NEAR(std::abs(s.beta[k] - ref), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(s.beta[k]), std::abs(b0[k]), 1e-12);
    }
}

TEST(GpeFree, TwoModeRabiExactAndFourthOrder) {
    ModelParams p = model_point(1);
    p.J = 0.0;
    p.h = 0.37;
    const auto b0 = generic_state(1);
    const double t = 2.0;
    // beta(t) = exp(i h t sigma_x) beta(0).
    Eigen::VectorXcd exact(2);
    exact[0] = std::cos(p.h * t) * b0[0] + cplx(0, std::sin(p.h * t)) * b0[1];
    exact[1] = std::cos(p.h * t) * b0[1] + cplx(0, std::sin(p.h * t)) * b0[0];
    auto err = [&](int steps) {
        GpeState s{b0};
        for (int i = 0; i < steps; ++i) s = gpe_free_step(s, p, t / steps);
        return (s.beta - exact).norm();
    };
    EXPECT_LT(err(1000), 1e-12);
    const double ratio = err(10) / err(20);
    EXPECT_NEAR(ratio, 16.0, 1.0);
}

TEST(GpeFree, PeriodMapEqualsSteppedRk4) {
    for (int tl : {1, 2, 5}) {
        ModelParams p = model_point(tl);
        p.phi = 0.0;
        p.K = 0.0;
        const PeriodMap map(p, 200);
        GpeState a{generic_state(tl)};
        GpeState b = a;
        map.advance(a);
        for (int s = 0; s < 200; ++s) b = gpe_free_step(b, p, p.tau / 200);
        EXPECT_LT((a.beta - b.beta).norm(), 1e-13);
    }
}

TEST(GpeKick, PerfectFlip) {
    for (int tl : {1, 2, 3, 6}) {
        ModelParams p = model_point(tl);
        p.K = 0.0;
        const GpeState s{generic_state(tl)};
        EXPECT_NEAR(gpe_kick(s, p).sz(), -s.sz(), 1e-13);
    }
    ModelParams half = model_point(1);
    half.K = 0.0;
    const auto out = gpe_kick(GpeState::fully_up(1), half);
    EXPECT_NEAR(std::abs(out.beta[0] - cplx(0, -1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out.beta[1]), 0.0, 1e-15);
}

TEST(GpeKick, MatchesSmoothedDelta) {
    ModelParams p = model_point(2);
    const auto b0 = generic_state(2);
    const auto closed = gpe_kick(GpeState{b0}, p);
    const auto smooth = smoothed_kick(p, b0, 2000);
    EXPECT_LT((closed.beta - smooth).cwiseAbs().maxCoeff(), 1e-6);
    ModelParams strong = model_point(3);
    strong.K = 2.5;
    strong.phi = 1.1;
    const auto b3 = generic_state(3);
    EXPECT_LT((gpe_kick(GpeState{b3}, strong).beta - smoothed_kick(strong, b3, 2000)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GpeKick, PreservesNormAndCoherence) {
    ModelParams p = model_point(4);
    p.K = 1.7;
    const GpeState s{generic_state(4)};
    const auto out = gpe_kick(s, p);
    EXPECT_NEAR(out.norm_squared(), 1.0, 1e-14);
    EXPECT_NEAR(kick_coherence(out.beta), kick_coherence(s.beta), 1e-14);
}

TEST(GpeTrajectory, PerfectFlipHoldsOrder) {
    ModelParams p = model_point(4);
    p.K = 0.0;
    p.h = 0.0;
    const auto t = gpe_trajectory(p, GpeState::fully_up(4), 100);
    for (double v : t.record.values) ASSERT_NEAR(v, p.l(), 1e-10);
}

TEST(GpeTrajectory, NormOverLongRun) {
    const auto t = gpe_trajectory(model_point(2), GpeState::fully_up(2), 10000);
    EXPECT_LT(t.max_norm_drift, 1e-8);
}

TEST(GpeTrajectory, RejectsUnnormalizedStart) {
    GpeState s{Eigen::VectorXcd::Ones(3)};
    EXPECT_THROW((void)gpe_trajectory(model_point(2), s, 3), std::invalid_argument);
}

TEST(GpeTrajectory, StepSelectionConverges) {
    const auto sel = select_steps(model_point(2), GpeState::fully_up(2));
    EXPECT_LT(sel.deviation, 1e-8);
    EXPECT_GE(sel.steps, 1000);
}

TEST(Rabi, SyntheticCosine) {
    const std::size_t len = std::size_t{1} << 14;
    std::vector<double> s(len);
    for (std::size_t n = 0; n < len; ++n) s[n] = std::cos((std::numbers::pi - 0.01) * static_cast<double>(n));
    const auto d = rabi_analysis(s);
    ASSERT_TRUE(d.omega_rabi.has_value());
    EXPECT_NEAR(*d.omega_rabi, 0.01, 2.0 * std::numbers::pi / static_cast<double>(len));
    EXPECT_NEAR(d.amplitude, std::sqrt(0.5), 1e-3);
}

TEST(Rabi, ConstantSeriesHasNoPeak) {
    const std::vector<double> s(5000, 0.7);
    const auto d = rabi_analysis(s);
    EXPECT_FALSE(d.omega_rabi.has_value());
    EXPECT_NEAR(d.amplitude, 0.0, 1e-12);
    EXPECT_EQ(d.length, 4096u);
    EXPECT_THROW((void)rabi_analysis(std::vector<double>(100, 0.0)), std::invalid_argument);
}

TEST(Rabi, PersistentOscillationAtSpinOne) {
    const PeriodMap map(model_point(2));
    const auto t = gpe_trajectory(map, GpeState::fully_up(2), 20000);
    std::vector<double> window_rms;
    for (std::size_t w = 0; w < 10; ++w) {
        const std::span<const double> o(t.record.values.data() + 1 + w * 1000, 1000);
        window_rms.push_back(analysis::rms(o));
    }
    const auto [lo, hi] = std::minmax_element(window_rms.begin(), window_rms.end());
    EXPECT_LT((*hi - *lo) / *hi, 0.1);
    // The amplitude from s^z and from the order parameter coincide when the
    // order parameter averages to zero.
    EXPECT_NEAR(analysis::rms_deviation(t.sz), analysis::rms_deviation(t.record.values), 0.02);
}

TEST(Rabi, PerturbedStartKeepsFrequency) {
    const PeriodMap map(model_point(2));
    const auto a = rabi_adaptive(map, GpeState::fully_up(2));
    const auto b = rabi_adaptive(map, GpeState::perturbed(2, 0.1));
    ASSERT_TRUE(a.omega_rabi && b.omega_rabi);
    EXPECT_NEAR(*b.omega_rabi / *a.omega_rabi, 1.0, 0.05);
}

TEST(Lyapunov, IsometricFlowHasZeroExponent) {
    ModelParams p = model_point(2);
    p.h = 0.0;
    p.K = 0.0;
    const auto r = lyapunov(PeriodMap(p), GpeState::perturbed(2, 0.3), 2000);
    EXPECT_NEAR(r.per_period, 0.0, 1e-6);
}

TEST(Lyapunov, RejectsBadArguments) {
    const PeriodMap map(model_point(2));
    EXPECT_THROW((void)lyapunov(map, GpeState::fully_up(2), 0), std::invalid_argument);
    EXPECT_THROW((void)lyapunov(map, GpeState::fully_up(2), 10, 0.5), std::invalid_argument);
}

TEST(BreakdownTime, Arithmetic) {
    EXPECT_NEAR(breakdown_time(0.5, std::exp(2.0)), 2.0, 1e-12);
    EXPECT_NEAR(breakdown_time(0.01, 100.0), 230.2585, 1e-3);
    EXPECT_THROW((void)breakdown_time(0.0, 10.0), std::invalid_argument);
    EXPECT_THROW((void)breakdown_time(0.1, 0.5), std::invalid_argument);
}
