#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

#include "anonsim/matching.hpp"
#include "anonsim/rng.hpp"

using namespace anonsim;

namespace {

double brute_force_best(const std::vector<double>& w, std::size_t rows, std::size_t cols) {
    // rows <= cols: try every injective row -> column map via column permutations.
    std::vector<std::size_t> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0;
    do {
        double total = 0;
        for (std::size_t r = 0; r < rows; ++r) total += w[r * cols + perm[r]];
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// P(row i -> column j) under product-weighted perfect matchings, by enumeration.
std::vector<double> brute_force_marginals(const std::vector<double>& m, std::size_t k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<double> out(k * k, 0.0);
    double total = 0;
    do {
        double prod = 1;
        for (std::size_t r = 0; r < k; ++r) prod *= m[r * k + perm[r]];
        total += prod;
        for (std::size_t r = 0; r < k; ++r) out[r * k + perm[r]] += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (double& v : out) v /= total;
    return out;
}

// Nested or disjoint supports with factored weights, as stems on a tree produce.
std::vector<double> random_laminar(Rng& rng, std::size_t k) {
    std::vector<double> alpha(k), beta(k), m(k * k, 0.0);
    for (auto& v : alpha) v = 0.1 + rng.uniform01();
    for (auto& v : beta) v = 0.1 + rng.uniform01();
    // Columns 0..k-1 on a line; row i covers a prefix or a block ending at an anchor.
    std::vector<std::size_t> cols(k);
    std::iota(cols.begin(), cols.end(), 0);
    rng.shuffle(cols);
    for (std::size_t i = 0; i < k; ++i) {
        // Prefix [0, len) of the shuffled column order, len >= i + 1 keeps a matching alive.
        const std::size_t len = i + 1 + rng.uniform_below(k - i);
        for (std::size_t t = 0; t < len; ++t) m[i * k + cols[t]] = alpha[i] * beta[cols[t]];
    }
    return m;
}

}  // namespace

TEST_CASE("assignment agrees with enumeration on random matrices") {
    Rng rng(21);
    for (int iter = 0; iter < 300; ++iter) {
        const std::size_t cols = 1 + rng.uniform_below(6);
        const std::size_t rows = 1 + rng.uniform_below(cols);
        std::vector<double> w(rows * cols);
        for (auto& x : w) x = rng.bernoulli(0.3) ? 0.0 : std::floor(rng.uniform01() * 5) / 4;
        const auto a = max_weight_assignment(w, rows, cols);
        REQUIRE(a.size() == rows);
        std::set<std::size_t> used;
        double total = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            REQUIRE(a[r] < cols);
            REQUIRE(used.insert(a[r]).second);
            total += w[r * cols + a[r]];
        }
        CHECK(total == Catch::Approx(brute_force_best(w, rows, cols)).margin(1e-12));
    }
}

TEST_CASE("assignment with more rows than columns leaves rows unassigned") {
    const std::vector<double> w = {0.1, 0.9, 0.8, 0.2, 0.5, 0.5};
    const auto a = max_weight_assignment(w, 3, 2);
    CHECK(std::count(a.begin(), a.end(), kUnassigned) == 1);
    CHECK(a[0] == 1);
    CHECK(a[1] == 0);
}

TEST_CASE("diagonal assignment") {
    const std::vector<double> w = {1, 0, 0, 1};
    CHECK(max_weight_assignment(w, 2, 2) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("subset marginals agree with enumeration") {
    Rng rng(4);
    for (std::size_t k = 1; k <= 7; ++k) {
        std::vector<double> m(k * k);
        for (auto& x : m) x = rng.bernoulli(0.3) ? 0.0 : rng.uniform01();
        for (std::size_t i = 0; i < k; ++i) m[i * k + i] = 0.5;
        const auto got = assignment_marginals(m, k);
        const auto want = brute_force_marginals(m, k);
        for (std::size_t i = 0; i < k * k; ++i) {
            CHECK(got[i] >= 0.0);
            CHECK(got[i] == Catch::Approx(want[i]).margin(1e-12));
            if (want[i] == 0.0) CHECK(got[i] == 0.0);
        }
    }
    CHECK(assignment_marginals(std::vector<double>(4, 1.0), 2) == std::vector<double>(4, 0.5));
    CHECK_THROWS(assignment_marginals(std::vector<double>{0, 1, 0, 1}, 2));
}

TEST_CASE("laminar marginals agree with enumeration") {
    Rng rng(8);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t k = 1 + rng.uniform_below(7);
        const auto m = random_laminar(rng, k);
        const auto got = laminar_assignment_marginals(m, k);
        REQUIRE(got);
        const auto want = brute_force_marginals(m, k);
        for (std::size_t i = 0; i < k * k; ++i) CHECK((*got)[i] == Catch::Approx(want[i]).margin(1e-12));
    }
}

TEST_CASE("laminar marginals decline unstructured matrices") {
    // Crossing supports {0,1} and {1,2}.
    const std::vector<double> crossing = {1, 1, 0, 0, 1, 1, 1, 1, 1};
    CHECK_FALSE(laminar_assignment_marginals(crossing, 3));
    // Nested supports but weights that do not factor.
    const std::vector<double> skewed = {1, 2, 3, 1};
    CHECK_FALSE(laminar_assignment_marginals(skewed, 2));
    const std::vector<double> uniform(9, 1.0);
    const auto u = laminar_assignment_marginals(uniform, 3);
    REQUIRE(u);
    for (double v : *u) CHECK(v == Catch::Approx(1.0 / 3));
}

TEST_CASE("laminar marginals scale to large blocks") {
    Rng rng(9);
    const std::size_t k = 300;
    const auto m = random_laminar(rng, k);
    const auto got = laminar_assignment_marginals(m, k);
    REQUIRE(got);
    for (std::size_t i = 0; i < k; ++i) {
        double row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += (*got)[i * k + j];
            col += (*got)[j * k + i];
        }
        CHECK(row == Catch::Approx(1.0));
        CHECK(col == Catch::Approx(1.0));
    }
}
