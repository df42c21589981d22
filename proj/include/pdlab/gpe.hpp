#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdlab/analysis.hpp"
#include "pdlab/fock.hpp"
#include "pdlab/linalg.hpp"
#include "pdlab/model.hpp"

namespace pdlab::gpe {

using linalg::cplx;

inline constexpr int default_steps_per_period = 1000;
inline constexpr double norm_tolerance = 1e-8;

/// Mean-field amplitudes beta_m, stored at index k for m = k - l.
struct GpeState {
    Eigen::VectorXcd beta;

    [[nodiscard]] double norm_squared() const { return beta.squaredNorm(); }

    /// s^z = sum_m m |beta_m|^2.
    [[nodiscard]] double sz() const {
        const double l = 0.5 * static_cast<double>(beta.size() - 1);
        double acc = 0.0;
        for (Eigen::Index k = 0; k < beta.size(); ++k) acc += (static_cast<double>(k) - l) * std::norm(beta[k]);
        return acc;
    }

    /// beta_m = delta_{m,l}.
    [[nodiscard]] static GpeState fully_up(int twice_l) {
        GpeState s{Eigen::VectorXcd::Zero(twice_l + 1)};
        s.beta[twice_l] = 1.0;
        return s;
    }

    /// eps on the mode just below the top (m = l - 1) and sqrt(1 - eps^2) on
    /// m = l. For l = 1 this puts eps on m = 0.
    [[nodiscard]] static GpeState perturbed(int twice_l, double eps) {
        if (!(std::abs(eps) <= 1.0)) throw std::invalid_argument("perturbed: |eps| must be <= 1");
        GpeState s{Eigen::VectorXcd::Zero(twice_l + 1)};
        s.beta[twice_l] = std::sqrt(1.0 - eps * eps);
        s.beta[twice_l - 1] = eps;
        return s;
    }
};

/// Coefficients of the linear free flow i d(beta)/dt = H beta, with
/// H = -(J/l) diag(m^2) - h M and M the tridiagonal hopping matrix.
struct FreeFlow {
    Eigen::VectorXd diag;   // -(J/l) m^2
    Eigen::VectorXd upper;  // -h sqrt(l(l+1) - m(m+1)), between k and k+1

    explicit FreeFlow(const ModelParams& p) : diag(p.modes()), upper(p.twice_l) {
        for (int k = 0; k < p.modes(); ++k) {
            const double m = k - p.l();
            diag[k] = -(p.J / p.l()) * m * m;
        }
        for (int k = 0; k < p.twice_l; ++k) upper[k] = -p.h * fock::hop_amplitude(p.twice_l, k);
    }

    /// -i H beta.
    void rhs(const Eigen::VectorXcd& b, Eigen::VectorXcd& out) const {
        const Eigen::Index n = b.size();
        for (Eigen::Index k = 0; k < n; ++k) {
            cplx hb = diag[k] * b[k];
            if (k + 1 < n) hb += upper[k] * b[k + 1];
            if (k > 0) hb += upper[k - 1] * b[k - 1];
            out[k] = cplx(hb.imag(), -hb.real());
        }
    }

    void rk4_step(Eigen::VectorXcd& b, double dt) const {
        const Eigen::Index n = b.size();
        Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), tmp(n);
        rhs(b, k1);
        tmp = b + (0.5 * dt) * k1;
        rhs(tmp, k2);
        tmp = b + (0.5 * dt) * k2;
        rhs(tmp, k3);
        tmp = b + dt * k3;
        rhs(tmp, k4);
        b += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

/// One RK4 step of the free mean-field flow.
[[nodiscard]] inline GpeState gpe_free_step(const GpeState& s, const ModelParams& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("gpe_free_step: dt must be > 0");
    if (s.beta.size() != p.modes()) throw std::invalid_argument("gpe_free_step: state size mismatch");
    GpeState out = s;
    FreeFlow(p).rk4_step(out.beta, dt);
    return out;
}

/// Eigendecomposition of the (2l+1) x (2l+1) hopping matrix M.
struct HoppingSpectrum {
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;

    explicit HoppingSpectrum(int twice_l) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(twice_l + 1, twice_l + 1);
        for (int k = 0; k < twice_l; ++k) {
            const double c = fock::hop_amplitude(twice_l, k);
            m(k, k + 1) = c;
            m(k + 1, k) = c;
        }
        auto e = linalg::symmetric_eigen(m, "hopping matrix");
        vectors = std::move(e.vectors);
        values = std::move(e.values);
    }
};

/// sigma = sum_m sqrt(l(l+1)-m(m+1)) Re(beta_m^* beta_{m+1}).
[[nodiscard]] inline double kick_coherence(const Eigen::VectorXcd& b) {
    const int twice_l = static_cast<int>(b.size()) - 1;
    double acc = 0.0;
    for (int k = 0; k < twice_l; ++k) acc += fock::hop_amplitude(twice_l, k) * std::real(std::conj(b[k]) * b[k + 1]);
    return acc;
}

/// Closed-form kick beta -> exp(-i lambda M) beta with
/// lambda = phi/2 - (K/2l) sigma. Exact because sigma is conserved by the
/// flow generated by M.
class Kick {
public:
    explicit Kick(const ModelParams& p) : p_(p), spec_(p.twice_l) {}

    void apply(Eigen::VectorXcd& b) const {
        const double lambda = 0.5 * p_.phi - (p_.K / (2.0 * p_.l())) * kick_coherence(b);
        Eigen::VectorXcd y = spec_.vectors.transpose() * b;
        for (Eigen::Index k = 0; k < y.size(); ++k) y[k] *= std::polar(1.0, -lambda * spec_.values[k]);
        b.noalias() = spec_.vectors * y;
    }

private:
    ModelParams p_;
    HoppingSpectrum spec_;
};

[[nodiscard]] inline GpeState gpe_kick(const GpeState& s, const ModelParams& p) {
    if (s.beta.size() != p.modes()) throw std::invalid_argument("gpe_kick: state size mismatch");
    GpeState out = s;
    Kick(p).apply(out.beta);
    return out;
}

/// Stroboscopic one-period map: kick, then free flow over tau.
///
/// The free flow is linear, so one RK4 step is the matrix polynomial
/// R(-i H dt) with R(z) = 1 + z + z^2/2 + z^3/6 + z^4/24, and `steps` of
/// them give V diag(R(-i e dt)^steps) V^T in the eigenbasis of H. This is
/// the RK4 propagator itself, built without the roundoff of a thousand
/// matrix products.
class PeriodMap {
public:
    PeriodMap(const ModelParams& p, int steps = default_steps_per_period) : p_(p), kick_(p), steps_(steps) {
        p.validate();
        if (steps < 1) throw std::invalid_argument("PeriodMap: steps must be >= 1");
        const FreeFlow flow(p);
        const int n = p.modes();
        Eigen::MatrixXd h = flow.diag.asDiagonal();
        for (int k = 0; k + 1 < n; ++k) {
            h(k, k + 1) = flow.upper[k];
            h(k + 1, k) = flow.upper[k];
        }
        const auto e = linalg::symmetric_eigen(h, "GPE free Hamiltonian");
        const double dt = p.tau / steps;
        Eigen::VectorXcd g(n);
        for (int k = 0; k < n; ++k) {
            const cplx z(0.0, -e.values[k] * dt);
            const cplx r = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
            g[k] = std::polar(std::pow(std::abs(r), steps), steps * std::arg(r));
        }
        propagator_ = e.vectors.cast<cplx>() * g.asDiagonal() * e.vectors.transpose().cast<cplx>();
    }

    [[nodiscard]] const ModelParams& params() const noexcept { return p_; }
    [[nodiscard]] int steps() const noexcept { return steps_; }
    [[nodiscard]] const Eigen::MatrixXcd& free_propagator() const noexcept { return propagator_; }

    void advance(Eigen::VectorXcd& b) const {
        kick_.apply(b);
        b = propagator_ * b;
    }

    void advance(GpeState& s) const { advance(s.beta); }

private:
    ModelParams p_;
    Kick kick_;
    int steps_;
    Eigen::MatrixXcd propagator_;
};

struct GpeTrajectory {
    TrajectoryRecord record;  // (-1)^n s^z
    std::vector<double> sz;
    double max_norm_drift = 0.0;
};

/// s^z(n tau) and O(n tau) = (-1)^n s^z(n tau) for n = 0..n_max.
[[nodiscard]] inline GpeTrajectory gpe_trajectory(const PeriodMap& map, GpeState s, long n_max) {
    if (n_max < 0) throw std::invalid_argument("gpe_trajectory: n_max must be >= 0");
    if (s.beta.size() != map.params().modes()) throw std::invalid_argument("gpe_trajectory: state size mismatch");
    if (std::abs(s.norm_squared() - 1.0) > norm_tolerance)
        throw std::invalid_argument("gpe_trajectory: initial state not normalized");
    GpeTrajectory out;
    out.record.meta = {"gpe", map.params(), std::nullopt};
    out.record.times.reserve(static_cast<std::size_t>(n_max + 1));
    out.record.values.reserve(static_cast<std::size_t>(n_max + 1));
    out.sz.reserve(static_cast<std::size_t>(n_max + 1));
    for (long n = 0;; ++n) {
        const double drift = std::abs(s.norm_squared() - 1.0);
        out.max_norm_drift = std::max(out.max_norm_drift, drift);
        if (drift > norm_tolerance) throw NumericalAbort("gpe: norm drifted at n=" + std::to_string(n));
        const double sz = s.sz();
        out.sz.push_back(sz);
        out.record.push(n, stroboscopic_sign(n) * sz);
        if (n == n_max) break;
        map.advance(s);
    }
    return out;
}

[[nodiscard]] inline GpeTrajectory gpe_trajectory(const ModelParams& p, const GpeState& s0, long n_max,
                                                  int steps = default_steps_per_period) {
    return gpe_trajectory(PeriodMap(p, steps), s0, n_max);
}

/// Step-count selection: starting from `start` steps per period, double
/// until trajectories at S and 2S agree to `tol` over `periods` periods and
/// the norm drift stays below `tol`.
struct StepSelection {
    int steps;
    double deviation;
};

[[nodiscard]] inline StepSelection select_steps(const ModelParams& p, const GpeState& s0,
                                                int start = default_steps_per_period, long periods = 100,
                                                double tol = 1e-8, int max_steps = 1 << 16) {
    int steps = start;
    for (;;) {
        const auto a = gpe_trajectory(p, s0, periods, steps);
        const auto b = gpe_trajectory(p, s0, periods, 2 * steps);
        double dev = 0.0;
        for (std::size_t i = 0; i < a.sz.size(); ++i) dev = std::max(dev, std::abs(a.sz[i] - b.sz[i]));
        if ((dev < tol && a.max_norm_drift < tol) || 2 * steps > max_steps) return {steps, dev};
        steps *= 2;
    }
}

/// Rabi oscillation diagnostics of a stroboscopic s^z series.
struct RabiDiagnostics {
    std::optional<double> omega_rabi;  // pi - omega_peak, radians per period
    std::optional<double> omega_peak;
    double amplitude = 0.0;            // RMS deviation of s^z about its mean
    std::vector<double> spectrum;      // periodogram, bins k = 0..L/2
    std::size_t length = 0;            // samples used (a power of two)
};

inline constexpr std::size_t min_rabi_samples = std::size_t{1} << 12;

/// Periodogram peak of the s^z series truncated to the largest power of two.
/// The peak bin is refined by a parabola through the log-power of it and
/// its neighbours. The amplitude uses the same truncated series.
[[nodiscard]] inline RabiDiagnostics rabi_analysis(std::span<const double> sz) {
    if (sz.size() < min_rabi_samples) throw std::invalid_argument("rabi_analysis: need at least 2^12 samples");
    std::size_t len = 1;
    while (len * 2 <= sz.size()) len *= 2;
    const auto series = sz.first(len);
    RabiDiagnostics out;
    out.length = len;
    out.amplitude = analysis::rms_deviation(series);
    out.spectrum = analysis::periodogram(series);
    const auto& p = out.spectrum;
    const std::size_t half = len / 2;
    std::size_t kmax = 1;
    double pmin = p[1];
    for (std::size_t k = 1; k <= half; ++k) {
        if (p[k] > p[kmax]) kmax = k;
        pmin = std::min(pmin, p[k]);
    }
    if (p[kmax] - pmin <= 1e-12 * std::max(1.0, static_cast<double>(len))) return out;
    // Neighbours, mirrored about the Nyquist bin for a real series.
    const auto bin = [&](std::size_t k) { return k <= half ? p[k] : p[len - k]; };
    double offset = 0.0;
    if (kmax > 1) {
        const double a = std::log(std::max(bin(kmax - 1), 1e-300));
        const double b = std::log(std::max(bin(kmax), 1e-300));
        const double c = std::log(std::max(bin(kmax + 1), 1e-300));
        const double den = a - 2.0 * b + c;
        if (den < 0.0) offset = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
    }
    const double w = std::clamp(2.0 * std::numbers::pi * (static_cast<double>(kmax) + offset) / static_cast<double>(len),
                                0.0, std::numbers::pi);
    out.omega_peak = w;
    out.omega_rabi = std::numbers::pi - w;
    return out;
}

inline constexpr std::size_t max_rabi_samples = std::size_t{1} << 22;

/// Rabi diagnostics from the GPE s^z series starting at `start` samples,
/// doubling the length while the peak sits within 8 bins of pi (where the
/// resolution of omega_Rabi is poorest), up to `max_len` samples.
[[nodiscard]] inline RabiDiagnostics rabi_adaptive(const PeriodMap& map, const GpeState& s0,
                                                   std::size_t start = std::size_t{1} << 14,
                                                   std::size_t max_len = max_rabi_samples) {
    std::size_t len = std::max(start, min_rabi_samples);
    for (;;) {
        const auto traj = gpe_trajectory(map, s0, static_cast<long>(len) - 1);
        auto d = rabi_analysis(traj.sz);
        if (!d.omega_rabi || len >= max_len) return d;
        const double bins_from_pi = *d.omega_rabi * static_cast<double>(d.length) / (2.0 * std::numbers::pi);
        if (bins_from_pi >= 8.0) return d;
        len *= 2;
    }
}

struct LyapunovResult {
    double per_period = 0.0;
    double per_time = 0.0;
    long periods = 0;
};

/// Benettin estimate: evolve a reference and a companion at distance d0 for
/// one period, record d_n, pull the companion back along the separation to
/// distance d0, repeat. Distances are Euclidean on (Re beta, Im beta).
[[nodiscard]] inline LyapunovResult lyapunov(const PeriodMap& map, const GpeState& s0, long periods, double d0 = 1e-10) {
    if (periods < 1) throw std::invalid_argument("lyapunov: periods must be >= 1");
    if (!(d0 > 0.0 && d0 < 1e-2)) throw std::invalid_argument("lyapunov: d0 must be in (0, 1e-2)");
    const Eigen::Index n = s0.beta.size();
    Eigen::VectorXcd a = s0.beta;
    Eigen::VectorXcd dir(n);
    for (Eigen::Index k = 0; k < n; ++k)
        dir[k] = cplx(std::cos(1.3 * static_cast<double>(k) + 0.2), std::sin(0.7 * static_cast<double>(k) + 0.5));
    Eigen::VectorXcd b = a + (d0 / dir.norm()) * dir;
    double acc = 0.0;
    int bad = 0;
    for (long t = 0; t < periods; ++t) {
        map.advance(a);
        map.advance(b);
        const double d = (b - a).norm();
        if (!(d >= 1e-15 && d <= 1e-2)) {
            if (++bad >= 10 || !(d > 0.0) || !std::isfinite(d))
                throw NumericalAbort("lyapunov: separation left [1e-15, 1e-2] persistently");
        } else {
            bad = 0;
        }
        acc += std::log(d / d0);
        b = a + (d0 / d) * (b - a);
    }
    LyapunovResult out;
    out.periods = periods;
    out.per_period = acc / static_cast<double>(periods);
    out.per_time = out.per_period / map.params().tau;
    return out;
}

/// Time (1/2 lambda) log N after which mean-field predictions stop holding,
/// in the inverse units of lambda.
[[nodiscard]] inline double breakdown_time(double lambda, double N) {
    if (!(lambda > 0.0)) throw std::invalid_argument("breakdown_time: lambda must be > 0");
    if (!(N >= 1.0)) throw std::invalid_argument("breakdown_time: N must be >= 1");
    return std::log(N) / (2.0 * lambda);
}

}  // namespace pdlab::gpe
