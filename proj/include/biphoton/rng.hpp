#pragma once

#include <array>
#include <cstdint>

namespace biphoton {

// splitmix64 finalizer. Used both to expand seeds into generator state and as
// the documented ensemble stream-split function.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Trajectory i of an ensemble is seeded with split_seed(base, i).
inline std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base + index * 0x9E3779B97F4A7C15ull);
}

// xoshiro256** (Blackman & Vigna). Portable, seedable, 64-bit output;
// identical streams on every platform, unlike the standard distributions.
class Xoshiro256StarStar {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256StarStar(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            word = mix64(sm);
            sm += 0x9E3779B97F4A7C15ull;
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

inline constexpr const char* kRngIdentity = "xoshiro256** seeded via splitmix64";
inline constexpr const char* kSeedSplitIdentity =
    "seed_i = splitmix64(base + i * 0x9E3779B97F4A7C15)";

} // namespace biphoton
