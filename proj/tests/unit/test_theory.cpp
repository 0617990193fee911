#include <catch_amalgamated.hpp>

#include <cmath>

#include "anonsim/theory.hpp"

using namespace anonsim;

TEST_CASE("reference values") {
    CHECK(dynamic_line_loose_bound(0.2) == Catch::Approx(0.230258509299).epsilon(1e-10));
    CHECK(dynamic_line_tight_bound(0.2, 1000) == Catch::Approx(0.164764450671).epsilon(1e-10));
    CHECK(max_degree_scaling(1000, 1) == Catch::Approx(3.574249916582).epsilon(1e-10));
    CHECK(max_degree_scaling(1000, 2) == Catch::Approx(2.788216973421).epsilon(1e-10));
    CHECK(max_degree_scaling(1000, 4) == Catch::Approx(1.394108486710).epsilon(1e-10));
    CHECK(refresh_interval(5500, 0.15, 3, 0.4) == Catch::Approx(523.809523809524).epsilon(1e-10));
    CHECK(typical_ward_size(0.2) == 5);
    CHECK(typical_ward_size(0.15) == 7);

    const auto table = protocol_bounds(0.2, 1000, 4);
    CHECK(*table.value("flooding-static") == Catch::Approx(0.5904));
    CHECK(*table.value("proxy-first-spy") == Catch::Approx(0.137667758971).epsilon(1e-10));
    CHECK(*table.value("precision-lower") == Catch::Approx(0.04));
    CHECK(*table.value("recall-lower") == Catch::Approx(0.2));
    CHECK(*table.value("dynamic-tree-first-spy") == Catch::Approx(0.1));
    CHECK(table.entry("dandelion-recall").direction == BoundDirection::Exact);
    CHECK(table.entry("dynamic-line-tight").direction == BoundDirection::UpperOnOptimal);
    CHECK_THROWS_AS(table.entry("nope"), std::out_of_range);
}

TEST_CASE("bounds outside their domain are absent") {
    const auto table = protocol_bounds(0.4, 1000, 4);
    CHECK_FALSE(table.value("dynamic-line-loose"));
    CHECK_FALSE(table.value("dynamic-line-tight"));
    CHECK_FALSE(table.entry("dynamic-line-tight").absent_reason.empty());
    CHECK_FALSE(protocol_bounds(0.001, 1000, 4).value("dynamic-line-tight"));
    CHECK(protocol_bounds(0.001, 1000, 4).value("dynamic-line-loose"));
    CHECK_THROWS_AS(dynamic_line_tight_bound(0.35, 1000), std::domain_error);
    CHECK_THROWS_AS(dynamic_line_tight_bound(0.001, 1000), std::domain_error);
}

TEST_CASE("line bounds sit between p^2 and p") {
    for (std::size_t n : {1000u, 10000u, 100000u}) {
        for (int i = 0; i <= 27; ++i) {
            const double p = 0.05 + 0.01 * i;
            const double tight = dynamic_line_tight_bound(p, n);
            INFO("p " << p << " n " << n);
            CHECK(p * p <= tight);
            if (p <= 0.2) CHECK(tight <= p);
            const double slack = (1 - p) * (1 - p) / (static_cast<double>(n) * (1 - 3 * p));
            CHECK(dynamic_line_loose_bound(p) >= tight - slack);
        }
    }
}

TEST_CASE("max-degree scaling shrinks with k") {
    for (std::size_t n : {100u, 1000u, 100000u})
        for (std::size_t k = 1; k < 8; ++k) CHECK(max_degree_scaling(n, k + 1) < max_degree_scaling(n, k));
    CHECK(max_degree_scaling(100000, 1) > max_degree_scaling(1000, 1));
}

TEST_CASE("refresh interval scales with the leak budget") {
    const double base = refresh_interval(5500, 0.15, 3, 0.2);
    CHECK(refresh_interval(5500, 0.15, 3, 0.4) == Catch::Approx(2 * base));
    CHECK(refresh_interval(5500, 0.15, 3, 0.0) == 0.0);
    CHECK(refresh_interval(11000, 0.15, 3, 0.2) == Catch::Approx(2 * base));
    CHECK_THROWS_AS(refresh_interval(5500, 0.6, 3, 0.2), std::domain_error);
    CHECK_THROWS_AS(refresh_interval(5500, 0.15, 3, 1.5), std::domain_error);
}
