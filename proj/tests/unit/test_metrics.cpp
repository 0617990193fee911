#include <catch_amalgamated.hpp>

#include "anonsim/metrics.hpp"

using namespace anonsim;

namespace {

GroundTruth five() {
    GroundTruth t;
    for (NodeId v = 0; v < 5; ++v) {
        t.txs.push_back(TxId{10 + v});
        t.sources.push_back(v);
    }
    return t;
}

SourceMapping mapping(const GroundTruth& t, std::vector<NodeId> targets, bool matching) {
    return SourceMapping{t.txs, std::move(targets), matching};
}

}  // namespace

TEST_CASE("perfect mapping scores one") {
    const auto t = five();
    const auto m = evaluate_trial(mapping(t, t.sources, true), t);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.nodes == t.sources);
}

TEST_CASE("blaming one node for everything") {
    const auto t = five();
    const auto m = evaluate_trial(mapping(t, {2, 2, 2, 2, 2}, false), t);
    CHECK(m.recall == Catch::Approx(1.0 / 5));
    CHECK(m.precision == Catch::Approx(1.0 / 25));
    CHECK(m.per_node_precision[2] == Catch::Approx(0.2));
    CHECK(m.per_node_precision[0] == 0.0);
    CHECK(assert_region_bounds(m));
}

TEST_CASE("a matching with one hit") {
    const auto t = five();
    const auto m = evaluate_trial(mapping(t, {0, 2, 3, 4, 1}, true), t);
    CHECK(m.precision == Catch::Approx(0.2));
    CHECK(m.recall == Catch::Approx(0.2));
}

TEST_CASE("mapping order does not matter") {
    auto t = five();
    auto shuffled = mapping(t, {1, 0, 2, 2, 4}, false);
    std::swap(shuffled.txs[0], shuffled.txs[4]);
    std::swap(shuffled.targets[0], shuffled.targets[4]);
    const auto a = evaluate_trial(mapping(t, {1, 0, 2, 2, 4}, false), t);
    const auto b = evaluate_trial(shuffled, t);
    CHECK(a.precision == b.precision);
    CHECK(a.recall == b.recall);
}

TEST_CASE("region checks") {
    CHECK(assert_region_bounds(0.04, 0.2));
    CHECK(assert_region_bounds(0.2, 0.2));
    CHECK_FALSE(assert_region_bounds(0.3, 0.2));
    CHECK_FALSE(assert_region_bounds(0.01, 0.2));
    CHECK_FALSE(assert_region_bounds(0.3, 0.2).detail.empty());
}

TEST_CASE("aggregation") {
    const auto t = five();
    const auto m = evaluate_trial(mapping(t, {0, 2, 3, 4, 1}, true), t);
    const auto point = aggregate({m, m, m}, "dandelion", "cycle", 6, 1.0 / 6);
    CHECK(point.trials == 3);
    CHECK(point.recall == Catch::Approx(0.2));
    CHECK(point.recall_se == Catch::Approx(0.0).margin(1e-12));
    CHECK(point.precision_se == Catch::Approx(0.0).margin(1e-12));

    const auto ms = mean_stderr({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == 2.5);
    CHECK(ms.se == Catch::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK_THROWS(mean_stderr({1.0}));
}

TEST_CASE("malformed mappings are rejected") {
    const auto t = five();
    CHECK_THROWS(evaluate_trial(mapping(t, {0, 1, 2, 3, 7}, false), t));
    auto missing = mapping(t, {0, 1, 2, 3}, false);
    missing.txs.pop_back();
    CHECK_THROWS(evaluate_trial(missing, t));
    auto unknown = mapping(t, t.sources, true);
    unknown.txs[0] = TxId{999};
    CHECK_THROWS(evaluate_trial(unknown, t));
}
