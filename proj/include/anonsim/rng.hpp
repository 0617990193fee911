#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace anonsim {

/// SplitMix64 finalizer. Used for seed derivation and hash-keyed randomness.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and up to three keys.
/// The result depends only on the arguments, never on call order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

/// Map 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seeded generator. Wraps mt19937_64 (whose output sequence is fixed by the
/// standard) and implements its own distributions so results are identical
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound);

    double uniform01() { return bits_to_unit(engine_()); }

    bool bernoulli(double prob) { return uniform01() < prob; }

    /// Exponential(rate 1) variate.
    double exponential();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        shuffle(std::span<T>(items));
    }

    /// Uniform random permutation of 0..n-1.
    std::vector<std::uint32_t> permutation(std::size_t n);

    /// k distinct values drawn uniformly from [0, n) excluding `excluded`
    /// (pass n or more to exclude nothing). Order of the result is random.
    std::vector<std::uint32_t> sample_distinct(std::size_t n, std::size_t k,
                                               std::size_t excluded);

private:
    std::mt19937_64 engine_;
};

}  // namespace anonsim
