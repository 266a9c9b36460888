#ifndef ARE_RNG_HPP
#define ARE_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace are {

// SplitMix64 step; used for seeding and for deriving independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** 1.0 with every draw mapped by hand, so a (seed, stream) pair
// yields the same values on every platform and standard library.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            word = splitmix64(sm);
        }
    }

    // Independent stream keyed by (seed, domain, index).
    static constexpr Xoshiro256 stream(std::uint64_t seed, std::uint64_t domain,
                                       std::uint64_t index) {
        std::uint64_t mix = seed;
        std::uint64_t key = splitmix64(mix) ^ (domain * 0xD1B54A32D192ED03ULL);
        mix = key;
        key = splitmix64(mix) ^ (index * 0xAEF17502108EF2D9ULL);
        mix = key;
        return Xoshiro256(splitmix64(mix));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    constexpr result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1].
    constexpr double uniform_open_low() {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] (Lemire's multiply-shift with rejection).
    constexpr std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        const std::uint64_t range = hi - lo;
        if (range == max()) {
            return (*this)();
        }
        const std::uint64_t n = range + 1;
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return lo + static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via Box-Muller (one value per call, the sine branch dropped).
    double normal() {
        const double u1 = uniform_open_low();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace are

#endif  // ARE_RNG_HPP
