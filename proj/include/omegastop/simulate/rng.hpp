#pragma once

#include <cstdint>
#include <random>

namespace omegastop::sim {

/// Random stream owned by one path. Streams are keyed by (seed, path index)
/// so a path draws the same numbers whichever worker runs it.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32),
                          0x6f6d6567u};
        engine_.seed(seq);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace omegastop::sim
