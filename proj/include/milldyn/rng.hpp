// Deterministic random streams for noise injection. std::normal_distribution
// is implementation-defined, so Gaussians are drawn by Box-Muller over a
// mt19937_64 stream; stream seeds are derived with a splitmix64 mixer so that
// (seed, index...) pairs give independent, reproducible streams.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace milldyn {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Hash a seed with any number of stream indices.
template <typename... Ints>
std::uint64_t derive_stream_seed(std::uint64_t seed, Ints... indices) {
    std::uint64_t h = splitmix64(seed);
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(indices))), ...);
    return h;
}

class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t stream_seed) : engine_(stream_seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace milldyn
