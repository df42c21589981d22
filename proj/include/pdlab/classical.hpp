#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdlab/model.hpp"

namespace pdlab::classical {

using Vec3 = Eigen::Vector3d;

inline constexpr double spin_length = 0.5;
inline constexpr double norm_drift_limit = 1e-8;

/// N classical angular momenta of length 1/2.
struct ClassicalConfiguration {
    std::vector<Vec3> momenta;

    [[nodiscard]] static ClassicalConfiguration fully_up(int N) {
        if (N < 1) throw std::invalid_argument("classical: N must be >= 1");
        return {std::vector<Vec3>(static_cast<std::size_t>(N), Vec3(0.0, 0.0, spin_length))};
    }

    [[nodiscard]] double max_norm_drift() const {
        double d = 0.0;
        for (const auto& m : momenta) d = std::max(d, std::abs(m.norm() - spin_length));
        return d;
    }

    [[nodiscard]] double mean_mz() const {
        double acc = 0.0;
        for (const auto& m : momenta) acc += m.z();
        return acc / static_cast<double>(momenta.size());
    }
};

/// dm/dt = grad H x m with H = -2J (m^z)^2 - 2h m^x.
[[nodiscard]] inline Vec3 free_rate(const Vec3& m, double J, double h) {
    const Vec3 grad(-2.0 * h, 0.0, -4.0 * J * m.z());
    return grad.cross(m);
}

/// One RK4 step of the free precession.
inline void free_step(ClassicalConfiguration& c, const ModelParams& p, double dt) {
    for (auto& m : c.momenta) {
        const Vec3 k1 = free_rate(m, p.J, p.h);
        const Vec3 k2 = free_rate(m + 0.5 * dt * k1, p.J, p.h);
        const Vec3 k3 = free_rate(m + 0.5 * dt * k2, p.J, p.h);
        const Vec3 k4 = free_rate(m + dt * k3, p.J, p.h);
        m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

/// Exact rotation of m_j about x by phi - (K/N) sum_{i != j} m^x_i.
inline void kick(ClassicalConfiguration& c, const ModelParams& p) {
    double total = 0.0;
    for (const auto& m : c.momenta) total += m.x();
    const double g = p.K / static_cast<double>(c.momenta.size());
    for (auto& m : c.momenta) {
        const CosSin r = exact_cos_sin(p.phi - g * (total - m.x()));
        const double y = m.y(), z = m.z();
        m.y() = y * r.c - z * r.s;
        m.z() = z * r.c + y * r.s;
    }
}

/// (-1)^n (1/N) sum m^z normalized by 1/2, for n = 0..n_max, from the fully
/// up state. Aborts if any |m_j| drifts from 1/2 by more than 1e-8.
[[nodiscard]] inline TrajectoryRecord classical_trajectory(const ModelParams& p, long n_max, int steps = 1000) {
    p.validate();
    if (n_max < 0) throw std::invalid_argument("classical: n_max must be >= 0");
    if (steps < 1) throw std::invalid_argument("classical: steps must be >= 1");
    auto c = ClassicalConfiguration::fully_up(p.N);
    TrajectoryRecord rec;
    rec.meta = {"classical", p, std::nullopt};
    const double dt = p.tau / steps;
    for (long n = 0;; ++n) {
        if (c.max_norm_drift() > norm_drift_limit)
            throw NumericalAbort("classical: spin length drifted at n=" + std::to_string(n));
        rec.push(n, stroboscopic_sign(n) * c.mean_mz() / spin_length);
        if (n == n_max) break;
        kick(c, p);
        for (int s = 0; s < steps; ++s) free_step(c, p, dt);
    }
    return rec;
}

}  // namespace pdlab::classical
