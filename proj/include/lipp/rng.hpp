#ifndef LIPP_RNG_H
#define LIPP_RNG_H

#include <cstdint>
#include <random>

namespace lipp {

/**
 * Seeded RNG with portable helpers. std::uniform_real_distribution is
 * implementation-defined, so uniform draws are derived from raw mt19937_64
 * output directly; identical seeds give identical streams on any platform.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // Rejection sampling keeps the draw unbiased.
        std::uint64_t const limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do
            x = gen_();
        while (x >= limit);
        return x % n;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace lipp

#endif  // LIPP_RNG_H
