#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdlab {

/// Raised when an engine detects that its numerics can no longer be trusted
/// (norm drift, failed eigendecomposition check, separation underflow).
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical and driving parameters shared by every engine.
///
/// The spin magnitude is stored as the integer 2l so that half-integer
/// values are exact. Kicks fire at t = 0, tau, 2 tau, ...; the stroboscopic
/// state with index n is the state immediately before the n-th kick, so one
/// cycle is "kick, then free evolution over tau" and index 0 is the bare
/// initial state.
struct ModelParams {
    double J = 1.0;
    double h = 0.1;
    double K = 0.3;
    double tau = 0.6;
    double phi = std::numbers::pi;
    int twice_l = 2;
    int N = 1;

    [[nodiscard]] double l() const noexcept { return 0.5 * twice_l; }
    [[nodiscard]] int modes() const noexcept { return twice_l + 1; }

    void validate() const {
        if (twice_l < 1) throw std::invalid_argument("twice_l must be >= 1");
        if (N < 1) throw std::invalid_argument("N must be >= 1");
        if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
        for (double v : {J, h, K, tau, phi})
            if (!std::isfinite(v)) throw std::invalid_argument("parameters must be finite");
    }
};

/// Provenance attached to every trajectory.
struct RecordMeta {
    std::string engine;
    ModelParams params;
    std::optional<std::uint64_t> seed;
};

/// Stroboscopic series of the period-doubling order parameter.
struct TrajectoryRecord {
    std::vector<long> times;           // stroboscopic indices n
    std::vector<double> values;        // order parameter at n*tau
    std::vector<double> errors;        // one-sigma errors; empty when exact
    RecordMeta meta;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] bool has_errors() const noexcept { return !errors.empty(); }

    void push(long n, double value) {
        times.push_back(n);
        values.push_back(value);
    }

    void push(long n, double value, double error) {
        push(n, value);
        errors.push_back(error);
    }

    /// Throws std::logic_error if times are not strictly increasing or the
    /// value/error columns are ragged.
    void check() const {
        if (times.size() != values.size())
            throw std::logic_error("trajectory: times and values differ in length");
        if (!errors.empty() && errors.size() != values.size())
            throw std::logic_error("trajectory: errors and values differ in length");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (times[i] <= times[i - 1])
                throw std::logic_error("trajectory: times not strictly increasing");
    }
};

/// (-1)^n for a stroboscopic index.
[[nodiscard]] constexpr double stroboscopic_sign(long n) noexcept {
    return (n % 2 == 0) ? 1.0 : -1.0;
}

/// Period-doubling order parameter (-1)^n <S^z> / N.
[[nodiscard]] inline double order_parameter(long n, double sz_expectation, int N) {
    if (N < 1) throw std::invalid_argument("order_parameter: N must be >= 1");
    return stroboscopic_sign(n) * sz_expectation / static_cast<double>(N);
}

/// Rotation by an angle whose cosine and sine are exact when the angle is
/// an exact multiple of pi/2 in floating point (e.g. phi = pi with K = 0).
struct CosSin {
    double c;
    double s;
};

[[nodiscard]] inline CosSin exact_cos_sin(double theta) noexcept {
    const double q = theta / (0.5 * std::numbers::pi);
    if (std::isfinite(q) && q == std::nearbyint(q) && std::abs(q) < 1e15) {
        switch (static_cast<long long>(std::fmod(q, 4.0) + 4.0) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }
    return {std::cos(theta), std::sin(theta)};
}

}  // namespace pdlab
