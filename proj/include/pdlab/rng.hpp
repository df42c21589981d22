#pragma once

#include <cstdint>
#include <random>

namespace pdlab {

/// Per-stream generator derived from (seed, stream index).
///
/// std::mt19937_64 and std::seed_seq are fully specified by the standard,
/// and only raw output words are consumed (no std distributions, whose
/// algorithms are implementation-defined), so streams are reproducible
/// across compilers and independent of how work is scheduled.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x9e3779b9u};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// One fair bit.
    bool bit() {
        if (left_ == 0) {
            word_ = engine_();
            left_ = 64;
        }
        const bool b = (word_ & 1u) != 0;
        word_ >>= 1;
        --left_;
        return b;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
    std::uint64_t word_ = 0;
    int left_ = 0;
};

}  // namespace pdlab
