#ifndef QKTSNE_RNG_HPP
#define QKTSNE_RNG_HPP

#include <cstdint>
#include <random>

namespace qktsne {

// Seedable PRNG used everywhere randomness is needed. The engine is
// std::mt19937_64 (Mersenne Twister, 64-bit variant), whose output sequence
// is fully specified by the standard, so runs reproduce across platforms.
// Floating-point draws are derived from the raw 64-bit output directly
// instead of going through std::uniform_real_distribution, whose mapping is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 bits of precision.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased integer in [0, n) via rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates shuffle with a pinned visitation order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace qktsne

#endif
