#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdlab/model.hpp"
#include "pdlab/parallel.hpp"
#include "pdlab/rng.hpp"

namespace pdlab::dtwa {

using Vec3 = Eigen::Vector3d;

/// Classical Weyl-symbol vectors s_{j,m} for N sites of 2l spin-1/2 each,
/// stored site-major (index j * 2l + m).
struct SpinConfiguration {
    int N = 0;
    int twice_l = 0;
    std::vector<Vec3> spins;

    [[nodiscard]] Vec3& at(int j, int m) { return spins[static_cast<std::size_t>(j * twice_l + m)]; }
    [[nodiscard]] const Vec3& at(int j, int m) const { return spins[static_cast<std::size_t>(j * twice_l + m)]; }

    [[nodiscard]] double total_sz() const {
        double acc = 0.0;
        for (const auto& s : spins) acc += s.z();
        return acc;
    }
    [[nodiscard]] double total_sx() const {
        double acc = 0.0;
        for (const auto& s : spins) acc += s.x();
        return acc;
    }
};

inline const Vec3 phase_point_plus{1.0, 1.0, 1.0};
inline const Vec3 phase_point_minus{-1.0, -1.0, 1.0};

/// Each spin independently at (1,1,1) or (-1,-1,1) with probability 1/2.
[[nodiscard]] inline SpinConfiguration sample_initial(int N, int twice_l, StreamRng& rng) {
    if (N < 1 || twice_l < 1) throw std::invalid_argument("sample_initial: N and 2l must be >= 1");
    SpinConfiguration c{N, twice_l, std::vector<Vec3>(static_cast<std::size_t>(N) * static_cast<std::size_t>(twice_l))};
    for (auto& s : c.spins) s = rng.bit() ? phase_point_plus : phase_point_minus;
    return c;
}

/// Integration and sampling knobs.
struct DtwaOptions {
    std::uint64_t seed = 1;
    int n_r = 800;
    unsigned workers = 1;
    int steps = 1000;           // RK4 steps per period
    bool include_self = false;  // keep the m' = m term of the on-site sum
};

/// Precession field of the free flow for a spin whose site has total
/// z-component `site_z`:
///   ds/dt = Omega x s,  Omega = (-2h, 0, -(J/l)(Z_site - s^z)).
struct FreeField {
    double hx;
    double jz;
    bool include_self;

    FreeField(const ModelParams& p, bool self) : hx(-2.0 * p.h), jz(-p.J / p.l()), include_self(self) {}

    [[nodiscard]] Vec3 rate(const Vec3& s, double site_z) const {
        const double oz = jz * (include_self ? site_z : site_z - s.z());
        // (hx, 0, oz) x s
        return {-oz * s.y(), oz * s.x() - hx * s.z(), hx * s.y()};
    }
};

namespace detail {

/// Generic RK4 over a vector of spins; `rhs(state, out)` fills the rates.
template <class Rhs>
void rk4(std::vector<Vec3>& y, double dt, Rhs&& rhs, std::vector<Vec3>& work) {
    const std::size_t n = y.size();
    work.resize(5 * n);
    Vec3* k1 = work.data();
    Vec3* k2 = k1 + n;
    Vec3* k3 = k2 + n;
    Vec3* k4 = k3 + n;
    Vec3* tmp = k4 + n;
    rhs(y.data(), k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * dt) * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + (0.5 * dt) * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) y[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Rotation about x: s^y' = s^y cos - s^z sin, s^z' = s^z cos + s^y sin.
inline void rotate_x(Vec3& s, CosSin r) {
    const double y = s.y(), z = s.z();
    s.y() = y * r.c - z * r.s;
    s.z() = z * r.c + y * r.s;
}

inline double kick_coupling(const ModelParams& p) { return p.K / (4.0 * p.N * p.l()); }

}  // namespace detail

/// One RK4 step of the free equations of motion on every spin.
[[nodiscard]] inline SpinConfiguration dtwa_free_step(const SpinConfiguration& c, const ModelParams& p, double dt,
                                                      bool include_self = false) {
    if (!(dt > 0.0)) throw std::invalid_argument("dtwa_free_step: dt must be > 0");
    const FreeField field(p, include_self);
    const int L = c.twice_l;
    auto rhs = [&](const Vec3* s, Vec3* out) {
        for (int j = 0; j < c.N; ++j) {
            const Vec3* site = s + static_cast<std::ptrdiff_t>(j) * L;
            double z = 0.0;
            for (int m = 0; m < L; ++m) z += site[m].z();
            for (int m = 0; m < L; ++m) out[j * L + m] = field.rate(site[m], z);
        }
    };
    SpinConfiguration out = c;
    std::vector<Vec3> work;
    detail::rk4(out.spins, dt, rhs, work);
    return out;
}

/// Kick as an exact rotation of spin (i,m) about x by
/// phi - (K/4Nl) sum_{j != i} sum_m' s^x_{j,m'}.
[[nodiscard]] inline SpinConfiguration dtwa_kick(const SpinConfiguration& c, const ModelParams& p) {
    const double g = detail::kick_coupling(p);
    const int L = c.twice_l;
    std::vector<double> site_x(static_cast<std::size_t>(c.N), 0.0);
    double total = 0.0;
    for (int j = 0; j < c.N; ++j) {
        for (int m = 0; m < L; ++m) site_x[static_cast<std::size_t>(j)] += c.at(j, m).x();
        total += site_x[static_cast<std::size_t>(j)];
    }
    SpinConfiguration out = c;
    for (int j = 0; j < c.N; ++j) {
        const CosSin r = exact_cos_sin(p.phi - g * (total - site_x[static_cast<std::size_t>(j)]));
        for (int m = 0; m < L; ++m) detail::rotate_x(out.at(j, m), r);
    }
    return out;
}

/// Exact reduced description of a trajectory started on phase points.
///
/// Spins of one site that start on the same phase point feel identical
/// fields forever, and so do sites that start with the same number k of
/// (1,1,1) spins. A trajectory is therefore a histogram of k over sites
/// plus two vectors per occupied k: `a` for the k spins started at (1,1,1)
/// and `b` for the 2l - k started at (-1,-1,1).
class CompressedConfiguration {
public:
    struct Class {
        int k;
        long sites;
    };

    CompressedConfiguration(const SpinConfiguration& c) : N_(c.N), twice_l_(c.twice_l) {
        std::vector<long> hist(static_cast<std::size_t>(c.twice_l + 1), 0);
        for (int j = 0; j < c.N; ++j) {
            int k = 0;
            for (int m = 0; m < c.twice_l; ++m) {
                const Vec3& s = c.at(j, m);
                if (s == phase_point_plus) ++k;
                else if (s != phase_point_minus) throw std::invalid_argument("compress: spin is not on a phase point");
            }
            ++hist[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k <= c.twice_l; ++k)
            if (hist[static_cast<std::size_t>(k)] > 0) {
                classes_.push_back({k, hist[static_cast<std::size_t>(k)]});
                vectors_.push_back(phase_point_plus);
                vectors_.push_back(phase_point_minus);
            }
    }

    [[nodiscard]] int N() const noexcept { return N_; }
    [[nodiscard]] int twice_l() const noexcept { return twice_l_; }
    [[nodiscard]] const std::vector<Class>& classes() const noexcept { return classes_; }
    [[nodiscard]] const Vec3& a(std::size_t c) const { return vectors_[2 * c]; }
    [[nodiscard]] const Vec3& b(std::size_t c) const { return vectors_[2 * c + 1]; }

    /// Sum of s^z over all N * 2l spins.
    [[nodiscard]] double total_sz() const {
        double acc = 0.0;
        for (std::size_t c = 0; c < classes_.size(); ++c) acc += static_cast<double>(classes_[c].sites) * site_z(c, vectors_.data());
        return acc;
    }

    /// Expands back to one vector per spin, with the (1,1,1) spins of each
    /// site listed first.
    [[nodiscard]] SpinConfiguration expand() const {
        SpinConfiguration out{N_, twice_l_, {}};
        for (std::size_t c = 0; c < classes_.size(); ++c)
            for (long s = 0; s < classes_[c].sites; ++s)
                for (int m = 0; m < twice_l_; ++m) out.spins.push_back(m < classes_[c].k ? a(c) : b(c));
        return out;
    }

    void free_step(const FreeField& field, double dt, std::vector<Vec3>& work) {
        auto rhs = [&](const Vec3* v, Vec3* out) {
            for (std::size_t c = 0; c < classes_.size(); ++c) {
                const double z = site_z(c, v);
                out[2 * c] = field.rate(v[2 * c], z);
                out[2 * c + 1] = field.rate(v[2 * c + 1], z);
            }
        };
        detail::rk4(vectors_, dt, rhs, work);
    }

    void kick(const ModelParams& p) {
        const double g = detail::kick_coupling(p);
        double total = 0.0;
        for (std::size_t c = 0; c < classes_.size(); ++c) total += static_cast<double>(classes_[c].sites) * site_x(c);
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            const CosSin r = exact_cos_sin(p.phi - g * (total - site_x(c)));
            detail::rotate_x(vectors_[2 * c], r);
            detail::rotate_x(vectors_[2 * c + 1], r);
        }
    }

private:
    [[nodiscard]] double site_z(std::size_t c, const Vec3* v) const {
        const int k = classes_[c].k;
        return k * v[2 * c].z() + (twice_l_ - k) * v[2 * c + 1].z();
    }
    [[nodiscard]] double site_x(std::size_t c) const {
        const int k = classes_[c].k;
        return k * vectors_[2 * c].x() + (twice_l_ - k) * vectors_[2 * c + 1].x();
    }

    int N_;
    int twice_l_;
    std::vector<Class> classes_;
    std::vector<Vec3> vectors_;
};

/// Per-trajectory order parameter (-1)^n (1/2) sum s^z / (N l), n = 0..n_max,
/// from the full (uncompressed) engine. Used as a reference.
[[nodiscard]] inline std::vector<double> full_trajectory(SpinConfiguration c, const ModelParams& p, long n_max,
                                                         int steps, bool include_self = false) {
    std::vector<double> out;
    const double norm = static_cast<double>(p.N) * p.twice_l;
    const double dt = p.tau / steps;
    for (long n = 0;; ++n) {
        out.push_back(stroboscopic_sign(n) * c.total_sz() / norm);
        if (n == n_max) break;
        c = dtwa_kick(c, p);
        for (int s = 0; s < steps; ++s) c = dtwa_free_step(c, p, dt, include_self);
    }
    return out;
}

/// Same quantity from the compressed engine.
[[nodiscard]] inline std::vector<double> compressed_trajectory(CompressedConfiguration c, const ModelParams& p,
                                                               long n_max, int steps, bool include_self = false) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_max + 1));
    const double norm = static_cast<double>(p.N) * p.twice_l;
    const double dt = p.tau / steps;
    const FreeField field(p, include_self);
    std::vector<Vec3> work;
    for (long n = 0;; ++n) {
        const double v = stroboscopic_sign(n) * c.total_sz() / norm;
        if (!std::isfinite(v)) throw NumericalAbort("dtwa: non-finite spin at n=" + std::to_string(n));
        out.push_back(v);
        if (n == n_max) break;
        c.kick(p);
        for (int s = 0; s < steps; ++s) c.free_step(field, dt, work);
    }
    return out;
}

/// Sample mean and standard error of the mean over trajectories.
struct DtwaEstimate {
    double mean = 0.0;
    double sigma = 0.0;
};

namespace detail {

inline constexpr std::size_t leaf_trajectories = 8;

struct Moments {
    std::vector<double> sum;
    std::vector<double> sum_sq;
};

}  // namespace detail

/// Monte Carlo estimate of O(n tau)/l with standard errors, n = 0..n_max.
///
/// Trajectory r uses the stream (seed, r). Trajectories are grouped in fixed
/// leaves of eight, summed in index order, and the leaves are combined by
/// pairwise reduction, so the output is bit-identical for any worker count.
[[nodiscard]] inline TrajectoryRecord dtwa_order_parameter(const ModelParams& p, long n_max, const DtwaOptions& opt) {
    p.validate();
    if (n_max < 0) throw std::invalid_argument("dtwa: n_max must be >= 0");
    if (opt.n_r < 2) throw std::invalid_argument("dtwa: n_r must be >= 2");
    if (opt.steps < 1) throw std::invalid_argument("dtwa: steps must be >= 1");
    const std::size_t len = static_cast<std::size_t>(n_max + 1);
    const std::size_t n_r = static_cast<std::size_t>(opt.n_r);
    const std::size_t leaves = (n_r + detail::leaf_trajectories - 1) / detail::leaf_trajectories;
    std::vector<detail::Moments> partial(leaves);
    parallel_for(leaves, opt.workers, [&](std::size_t leaf) {
        detail::Moments m{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
        const std::size_t end = std::min(n_r, (leaf + 1) * detail::leaf_trajectories);
        for (std::size_t r = leaf * detail::leaf_trajectories; r < end; ++r) {
            StreamRng rng(opt.seed, r);
            const auto traj = compressed_trajectory(CompressedConfiguration(sample_initial(p.N, p.twice_l, rng)), p, n_max,
                                                    opt.steps, opt.include_self);
            for (std::size_t i = 0; i < len; ++i) {
                m.sum[i] += traj[i];
                m.sum_sq[i] += traj[i] * traj[i];
            }
        }
        partial[leaf] = std::move(m);
    });
    const auto total = pairwise_reduce(partial, 0, leaves, [](detail::Moments& acc, const detail::Moments& x) {
        for (std::size_t i = 0; i < acc.sum.size(); ++i) {
            acc.sum[i] += x.sum[i];
            acc.sum_sq[i] += x.sum_sq[i];
        }
    });
    TrajectoryRecord rec;
    rec.meta = {"dtwa", p, opt.seed};
    const double n = static_cast<double>(n_r);
    for (std::size_t i = 0; i < len; ++i) {
        const double mean = total.sum[i] / n;
        const double var = std::max(0.0, (total.sum_sq[i] - n * mean * mean) / (n - 1.0));
        rec.push(static_cast<long>(i), mean, std::sqrt(var / n));
    }
    return rec;
}

/// Step count per period: doubles from `start` until a few trajectories at
/// S and 2S agree to `tol` over `periods` periods.
struct StepSelection {
    int steps;
    double deviation;
};

[[nodiscard]] inline StepSelection select_steps(const ModelParams& p, std::uint64_t seed, int start = 16, long periods = 5,
                                                double tol = 1e-8, int trajectories = 4, int max_steps = 4096,
                                                bool include_self = false) {
    int steps = start;
    for (;;) {
        double dev = 0.0;
        for (int r = 0; r < trajectories; ++r) {
            StreamRng rng(seed, static_cast<std::uint64_t>(r));
            const CompressedConfiguration c(sample_initial(p.N, p.twice_l, rng));
            const auto a = compressed_trajectory(c, p, periods, steps, include_self);
            const auto b = compressed_trajectory(c, p, periods, 2 * steps, include_self);
            for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
        }
        if (dev < tol || 2 * steps > max_steps) return {steps, dev};
        steps *= 2;
    }
}

}  // namespace pdlab::dtwa
