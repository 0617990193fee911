#include "anonsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace anonsim {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) noexcept {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
    h = splitmix64(h ^ splitmix64(b + 0x85157AF5ULL));
    h = splitmix64(h ^ splitmix64(c + 0x2545F4914F6CDD1DULL));
    return h;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    // Rejection sampling on the largest multiple of bound.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

double Rng::exponential() {
    return -std::log1p(-uniform01());
}

std::vector<std::uint32_t> Rng::permutation(std::size_t n) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    shuffle(perm);
    return perm;
}

std::vector<std::uint32_t> Rng::sample_distinct(std::size_t n, std::size_t k,
                                                std::size_t excluded) {
    const std::size_t pool = excluded < n ? n - 1 : n;
    if (k > pool) throw std::invalid_argument("sample_distinct: k exceeds pool size");
    // Floyd's algorithm over a compacted index space that skips `excluded`.
    auto lift = [&](std::size_t idx) {
        return static_cast<std::uint32_t>(excluded < n && idx >= excluded ? idx + 1 : idx);
    };
    std::vector<std::uint32_t> out;
    out.reserve(k);
    std::unordered_set<std::size_t> chosen;
    for (std::size_t j = pool - k; j < pool; ++j) {
        std::size_t t = static_cast<std::size_t>(uniform_below(j + 1));
        if (chosen.insert(t).second) {
            out.push_back(lift(t));
        } else {
            chosen.insert(j);
            out.push_back(lift(j));
        }
    }
    shuffle(out);
    return out;
}

}  // namespace anonsim
