#pragma once

#include <cstdint>

namespace esl {

// Deterministic counter-seeded random stream (splitmix64 core).
//
// A stream is fully determined by (seed, tag, index), so draws for
// substream alpha are independent of assembly order and thread count.
// Tags separate logical purposes (xi draws, vector entries, covariance
// perturbations) sharing one master seed.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept
        : state_(derive(seed, tag, index)) {}

    std::uint64_t next_u64() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller; the spare is cached so a stream
    // consumes exactly one pair of uniforms per two gaussians.
    double gaussian() noexcept;

private:
    static std::uint64_t mix(std::uint64_t x) noexcept {
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t index) noexcept {
        std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ (tag + 0xd1b54a32d192ed03ULL));
        h = mix(h ^ (index + 0x8cb92ba72f3d8dd7ULL));
        return h;
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Stream tags used across the ensemble builders.
namespace stream_tag {
inline constexpr std::uint64_t xi = 1;
inline constexpr std::uint64_t y_vector = 2;
inline constexpr std::uint64_t x_vector = 3;
inline constexpr std::uint64_t cov_perturbation = 4;
}  // namespace stream_tag

}  // namespace esl
