#ifndef COGLASSO_RNG_HPP
#define COGLASSO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace coglasso {

// Deterministic pseudo-random stream. All draws are generated from raw
// mt19937_64 output with our own transforms, so sequences are bit-identical
// across standard library implementations. Child streams are derived from
// the base seed and an index, making results independent of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53;
    }

    // Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Standard normal via Box-Muller; caches the paired deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    bool bernoulli(double prob) { return uniform() < prob; }

    // Independent child stream keyed by (base seed, index); unaffected by
    // draws already taken from this stream.
    Rng child(std::uint64_t index) const {
        return Rng(splitmix64(base_seed_ ^ (0x9e3779b97f4a7c15ULL * (index + 1))));
    }

    std::uint64_t base_seed() const { return base_seed_; }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t base_seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// k distinct indices from [0, n), ascending. Partial Fisher-Yates.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace coglasso

#endif
