#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdlab/model.hpp"

namespace pdlab::analysis {

/// Ordinary least-squares line y = intercept + slope * x.
struct FitResult {
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_err = 0.0;
    double slope_err = 0.0;
    double residual_norm = 0.0;
    double r2 = 1.0;
    std::size_t points = 0;
    std::vector<double> residuals;
};

[[nodiscard]] inline FitResult fit_linear(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_linear: size mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("fit_linear: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_linear: x values are all equal");
    FitResult f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    f.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        f.residuals[i] = r;
        ssr += r * r;
    }
    f.residual_norm = std::sqrt(ssr);
    // Degenerate cases (exact fits, constant data) report R^2 = 1.
    const double scale = std::max(syy, 1e-300);
    f.r2 = (n <= 2 || ssr <= 1e-24 * std::max(1.0, syy)) ? 1.0 : std::clamp(1.0 - ssr / scale, 0.0, 1.0);
    if (n > 2) {
        const double s2 = ssr / static_cast<double>(n - 2);
        f.slope_err = std::sqrt(s2 / sxx);
        double sx2 = 0.0;
        for (double x : xs) sx2 += x * x;
        f.intercept_err = std::sqrt(s2 * sx2 / (static_cast<double>(n) * sxx));
    }
    return f;
}

/// log[O(t)/l] = A - delta t fitted over a window of stroboscopic points.
struct DecayFit {
    double A = 0.0;
    double delta = 0.0;
    double delta_err = 0.0;
    FitResult line;
    long first = 0;  // stroboscopic index range of the window
    long last = 0;
};

inline constexpr std::size_t min_fit_points = 10;

/// Fits the record's values (already normalized by l) on t = n tau. The
/// window starts at n = 1 and ends at the last point before the value first
/// drops below max(3 sigma, 0), sigma being the per-point error when present.
[[nodiscard]] inline DecayFit fit_exponential_decay(const TrajectoryRecord& rec) {
    rec.check();
    const double tau = rec.meta.params.tau;
    std::vector<double> ts, ys;
    long first = -1, last = -1;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec.times[i] < 1) continue;
        const double floor = rec.has_errors() ? std::max(3.0 * rec.errors[i], 0.0) : 0.0;
        if (!(rec.values[i] > floor)) break;
        if (first < 0) first = rec.times[i];
        last = rec.times[i];
        ts.push_back(tau * static_cast<double>(rec.times[i]));
        ys.push_back(std::log(rec.values[i]));
    }
    if (ts.size() < min_fit_points) throw std::domain_error("fit_exponential_decay: window too short");
    DecayFit out;
    out.line = fit_linear(ts, ys);
    out.A = out.line.intercept;
    out.delta = -out.line.slope;
    out.delta_err = out.line.slope_err;
    out.first = first;
    out.last = last;
    return out;
}

/// y = prefactor * x^exponent, fitted as a line in log-log space.
struct PowerLawFit {
    double prefactor = 0.0;
    double exponent = 0.0;
    double exponent_err = 0.0;
    FitResult line;
};

[[nodiscard]] inline PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::domain_error("fit_power_law: non-positive data");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    PowerLawFit out;
    out.line = fit_linear(lx, ly);
    out.prefactor = std::exp(out.line.intercept);
    out.exponent = out.line.slope;
    out.exponent_err = out.line.slope_err;
    return out;
}

/// First-moment decay time t_d = tau sum n O(n tau) / sum O(n tau).
struct DecayTime {
    double t_d = 0.0;
    double t_d_err = 0.0;
    long t_star = 0;  // first stroboscopic index with O <= 0
};

/// Both sums run over n = 1 .. t*/tau unless `numerator_cut` overrides the
/// upper limit of the numerator. Returns nullopt when the record never
/// reaches zero. Errors come from linear propagation of per-point errors.
[[nodiscard]] inline std::optional<DecayTime> decay_time(const TrajectoryRecord& rec,
                                                         std::optional<long> numerator_cut = std::nullopt) {
    rec.check();
    std::optional<std::size_t> zero;
    for (std::size_t i = 0; i < rec.size(); ++i)
        if (rec.values[i] <= 0.0) {
            zero = i;
            break;
        }
    if (!zero) return std::nullopt;
    const long cut = rec.times[*zero];
    const long num_cut = numerator_cut.value_or(cut);
    const double tau = rec.meta.params.tau;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const long n = rec.times[i];
        if (n < 1) continue;
        if (n <= num_cut) num += static_cast<double>(n) * rec.values[i];
        if (n <= cut) den += rec.values[i];
    }
    if (!(den > 0.0)) throw std::domain_error("decay_time: non-positive normalization");
    DecayTime out;
    out.t_star = cut;
    out.t_d = tau * num / den;
    if (rec.has_errors()) {
        double var = 0.0;
        for (std::size_t i = 0; i < rec.size(); ++i) {
            const long n = rec.times[i];
            if (n < 1) continue;
            double g = 0.0;
            if (n <= num_cut) g += tau * static_cast<double>(n) / den;
            if (n <= cut) g -= out.t_d / den;
            var += g * g * rec.errors[i] * rec.errors[i];
        }
        out.t_d_err = std::sqrt(var);
    }
    return out;
}

/// Linearly interpolated abscissae where y1 - y2 changes sign.
[[nodiscard]] inline std::vector<double> crossings(std::span<const double> xs, std::span<const double> y1,
                                                   std::span<const double> y2) {
    if (xs.size() != y1.size() || xs.size() != y2.size()) throw std::invalid_argument("crossings: grid mismatch");
    std::vector<double> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d0 = y1[i] - y2[i];
        if (d0 == 0.0) {
            out.push_back(xs[i]);
            continue;
        }
        if (i + 1 == xs.size()) break;
        const double d1 = y1[i + 1] - y2[i + 1];
        if (d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0)) out.push_back(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
    }
    return out;
}

/// First crossing, or nullopt for curves that never cross on the grid.
[[nodiscard]] inline std::optional<double> crossing_point(std::span<const double> xs, std::span<const double> y1,
                                                          std::span<const double> y2) {
    const auto c = crossings(xs, y1, y2);
    if (c.empty()) return std::nullopt;
    return c.front();
}

struct Curve {
    std::vector<double> x;
    std::vector<double> y;
};

struct PairCrossing {
    double l_low;
    double l_high;
    std::optional<double> x_star;
};

/// Crossing for each pair of adjacent curves (ordered by key).
[[nodiscard]] inline std::vector<PairCrossing> crossing_points(const std::map<double, Curve>& curves) {
    std::vector<PairCrossing> out;
    for (auto it = curves.begin(); it != curves.end(); ++it) {
        auto next = std::next(it);
        if (next == curves.end()) break;
        if (it->second.x != next->second.x) throw std::invalid_argument("crossing_points: curves on different grids");
        out.push_back({it->first, next->first, crossing_point(it->second.x, it->second.y, next->second.y)});
    }
    return out;
}

/// |X_k|^2 / L for k = 0 .. L/2 of a real series.
[[nodiscard]] inline std::vector<double> periodogram(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 2) throw std::invalid_argument("periodogram: series too short");
    Eigen::FFT<double> fft;
    std::vector<double> in(series.begin(), series.end());
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    std::vector<double> p(n / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(out[k]) / static_cast<double>(n);
    return p;
}

[[nodiscard]] inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

/// Root-mean-square deviation about the mean.
[[nodiscard]] inline double rms_deviation(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

[[nodiscard]] inline double rms(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += x * x;
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace pdlab::analysis
