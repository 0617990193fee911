#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

#include "anonsim/adversary.hpp"
#include "anonsim/metrics.hpp"
#include "anonsim/rng.hpp"
#include "anonsim/spreading.hpp"

using namespace anonsim;

namespace {

NetworkGraph with_spies(NetworkGraph g, std::initializer_list<NodeId> spies) {
    std::vector<Role> roles(g.size(), Role::Honest);
    for (NodeId s : spies) roles[s] = Role::Adversarial;
    g.set_roles(roles);
    return g;
}

GroundTruth truth_for(const std::vector<NodeId>& sources) {
    GroundTruth t;
    t.sources = sources;
    for (std::size_t i = 0; i < sources.size(); ++i) t.txs.push_back(TxId{1000 + i});
    return t;
}

NetworkGraph bidirectional_ring(std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v < n; ++v) {
        edges.emplace_back(v, static_cast<NodeId>((v + 1) % n));
        edges.emplace_back(static_cast<NodeId>((v + 1) % n), v);
    }
    return NetworkGraph(TopologySpec::undirected_regular(n, 2), 0, edges);
}

void check_log_invariants(const NetworkGraph& g, const ObservationLog& log) {
    REQUIRE(log.first_spy.size() == log.size());
    for (const auto& t : log.full) {
        REQUIRE_FALSE(g.is_spy(t.sender));
        if (t.virtual_exit)
            REQUIRE(t.spy == kVirtualSpy);
        else
            REQUIRE(g.is_spy(t.spy));
        REQUIRE(log.first_spy[t.tx]);
        REQUIRE(log.first_spy[t.tx]->time <= t.time);
    }
}

}  // namespace

TEST_CASE("ground truth is a random bijection onto honest nodes") {
    const auto g = place_adversaries(build_spliced_line(50, 1), 0.2, 2);
    const auto a = make_ground_truth(g, 9);
    const auto b = make_ground_truth(g, 9);
    CHECK(a.txs == b.txs);
    CHECK(a.sources == b.sources);
    auto sorted = a.sources;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == g.honest_nodes());
    CHECK(std::set<TxId>(a.txs.begin(), a.txs.end()).size() == a.size());
    CHECK(a.sources != make_ground_truth(g, 10).sources);
}

TEST_CASE("flooding: one hop to a spy") {
    const auto g = with_spies(NetworkGraph(TopologySpec::cycle(2), 0, {{0, 1}}), {1});
    const auto log = run_flooding(g, truth_for({0}));
    REQUIRE(log.first_spy[0]);
    CHECK(log.first_spy[0]->spy == 1);
    CHECK(log.first_spy[0]->sender == 0);
    CHECK(log.first_spy[0]->time == 1.0);
    CHECK(log.spies_in_round(0, 1) == 1);
}

TEST_CASE("flooding: spies two hops away on both sides of a ring") {
    const auto g = with_spies(bidirectional_ring(6), {2, 4});
    const auto log = run_flooding(g, truth_for({0, 1, 3, 5}));
    check_log_invariants(g, log);
    std::vector<ObservationTuple> from_zero;
    for (const auto& t : log.full)
        if (t.tx == 0) from_zero.push_back(t);
    REQUIRE(from_zero.size() == 2);
    CHECK(from_zero[0].time == 2.0);
    CHECK(from_zero[1].time == 2.0);
    CHECK(log.spies_in_round(0, 2) == 2);
    CHECK(log.first_spy[0]->spy == 2);
    CHECK(log.first_spy[0]->sender == 1);
}

TEST_CASE("flooding is deterministic and honours the horizon") {
    const auto g = place_adversaries(build_topology(TopologySpec::undirected_regular(200, 4), 3), 0.1, 4);
    const auto truth = make_ground_truth(g, 5);
    const auto a = run_flooding(g, truth);
    CHECK(a == run_flooding(g, truth));
    check_log_invariants(g, a);
    FloodingOptions options;
    options.rounds_after_first_spy = 1;
    const auto b = run_flooding(g, truth, options);
    for (std::size_t x = 0; x < truth.size(); ++x) {
        CHECK(b.first_spy[x] == a.first_spy[x]);
        CHECK(b.round_spy_counts[x].size() <= static_cast<std::size_t>(a.first_spy[x]->time) + 2);
    }
}

TEST_CASE("flooding reports sources that never reach a spy") {
    // 0 -> 1 only; spy 2 is unreachable.
    const auto g = with_spies(NetworkGraph(TopologySpec::cycle(3), 0, {{0, 1}, {2, 0}}), {2});
    CHECK_THROWS_WITH(run_flooding(g, truth_for({0, 1})), Catch::Matchers::ContainsSubstring("never reach"));
}

TEST_CASE("flooding on a dynamic 4-regular graph doubles its spy count per round") {
    double round2 = 0, round3 = 0;
    std::size_t sampled = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto g = place_adversaries(build_topology(TopologySpec::directed_regular(4096, 2), s), 0.1, s);
        const auto truth = make_ground_truth(g, s);
        FloodingOptions options;
        options.rounds_after_first_spy = 3;
        const auto log = run_flooding(g, truth, options);
        for (std::size_t x = 0; x < truth.size(); ++x) {
            if (log.first_spy[x]->time != 1.0) continue;
            round2 += log.spies_in_round(x, 2);
            round3 += log.spies_in_round(x, 3);
            ++sampled;
        }
    }
    REQUIRE(sampled > 1000);
    // Round i reaches about 2^i fresh nodes, a fraction p of them spies.
    CHECK(round2 / sampled == Catch::Approx(0.4).margin(0.06));
    CHECK(round3 / sampled == Catch::Approx(0.8).margin(0.1));
}

TEST_CASE("diffusion: forced senders") {
    SECTION("honest to spy") {
        const auto g = with_spies(NetworkGraph(TopologySpec::cycle(2), 0, {{0, 1}}), {1});
        for (std::uint64_t s = 0; s < 20; ++s)
            CHECK(run_diffusion(g, truth_for({0}), s).first_spy[0]->sender == 0);
    }
    SECTION("star with spy leaves") {
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId v = 1; v <= 4; ++v) {
            edges.emplace_back(0, v);
            edges.emplace_back(v, 0);
        }
        const auto g = with_spies(NetworkGraph(TopologySpec::complete(5), 0, edges), {1, 2, 3, 4});
        const auto log = run_diffusion(g, truth_for({0}), 3);
        REQUIRE(log.full.size() == 4);
        for (const auto& t : log.full) {
            CHECK(t.sender == 0);
            CHECK(t.time >= 0.0);
        }
        CHECK(log.first_spy[0]->time == 0.0);
    }
}

TEST_CASE("diffusion delays are exponential with unit rate") {
    const auto delay = exponential_delays(5);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) sum += delay(static_cast<std::size_t>(i), 1, 2);
    CHECK(sum / n == Catch::Approx(1.0).margin(0.015));
    CHECK(delay(3, 1, 2) == delay(3, 1, 2));
    CHECK(delay(3, 1, 2) != delay(3, 2, 1));
}

TEST_CASE("diffusion is exchangeable under honest relabeling") {
    const auto g = place_adversaries(build_topology(TopologySpec::undirected_regular(6, 2), 11), 1.0 / 3.0, 4);
    const auto truth = make_ground_truth(g, 2);
    const auto base_delay = exponential_delays(77);
    const auto log = run_diffusion(g, truth, base_delay);
    const auto honest = g.honest_nodes();

    std::vector<NodeId> image = honest;
    std::size_t permutations = 0;
    do {
        std::vector<NodeId> pi(g.size()), inverse(g.size());
        std::iota(pi.begin(), pi.end(), 0);
        for (std::size_t i = 0; i < honest.size(); ++i) pi[honest[i]] = image[i];
        for (NodeId v = 0; v < g.size(); ++v) inverse[pi[v]] = v;

        std::vector<std::pair<NodeId, NodeId>> edges;
        for (auto [a, b] : g.edges()) edges.emplace_back(pi[a], pi[b]);
        NetworkGraph h(g.spec(), g.seed(), edges);
        h.set_roles(g.roles());
        GroundTruth moved = truth;
        for (auto& s : moved.sources) s = pi[s];
        const EdgeDelay delay = [&](std::size_t tx, NodeId a, NodeId b) {
            return base_delay(tx, inverse[a], inverse[b]);
        };
        const auto permuted = run_diffusion(h, moved, delay);
        REQUIRE(permuted.full.size() == log.full.size());
        for (std::size_t i = 0; i < log.full.size(); ++i) {
            CHECK(permuted.full[i].spy == log.full[i].spy);
            CHECK(permuted.full[i].sender == pi[log.full[i].sender]);
            CHECK(permuted.full[i].time == log.full[i].time);
        }
        ++permutations;
    } while (std::next_permutation(image.begin(), image.end()));
    CHECK(permutations == 24);
}

TEST_CASE("diffusion first-spy recall on a 16-regular graph beats p") {
    std::vector<double> recalls;
    for (std::uint64_t t = 0; t < 500; ++t) {
        const auto g = place_adversaries(build_topology(TopologySpec::random_regular(1000), derive_seed(1, t)), 0.2,
                                         derive_seed(2, t));
        const auto truth = make_ground_truth(g, derive_seed(3, t));
        DiffusionOptions options;
        options.first_spy_only = true;
        const auto log = run_diffusion(g, truth, derive_seed(4, t), options);
        recalls.push_back(evaluate_trial(first_spy_estimator(AdversaryView::full(log, g)), truth).recall);
    }
    const auto m = mean_stderr(recalls);
    CHECK(m.mean >= 0.2);
    CHECK(m.mean <= 0.65);
    CHECK(m.mean > 0.2 + 2 * m.se);
}

TEST_CASE("diffusion by proxy") {
    SECTION("one honest node and one spy") {
        const auto g = with_spies(NetworkGraph(TopologySpec::complete(2), 0, {{0, 1}, {1, 0}}), {1});
        const auto truth = truth_for({0});
        const auto log = run_diffusion_by_proxy(g, truth, 3);
        CHECK(log.first_spy[0]->sender == 0);
        CHECK(evaluate_trial(first_spy_estimator(AdversaryView::full(log, g)), truth).recall == 1.0);
    }
    SECTION("each hop lands on a spy with probability about p") {
        const auto g = place_adversaries(NetworkGraph(TopologySpec::complete(1000), 0, {}), 0.2, 8);
        ProxyTrace trace;
        for (std::uint64_t s = 0; s < 20; ++s) run_diffusion_by_proxy(g, make_ground_truth(g, s), s, &trace);
        CHECK(trace.spy_hits == 20 * 800);
        CHECK(static_cast<double>(trace.spy_hits) / static_cast<double>(trace.hops) ==
              Catch::Approx(0.2).margin(0.01));
    }
}

TEST_CASE("dandelion: a spy as first hop is always caught") {
    const auto g = with_spies(NetworkGraph(TopologySpec::cycle(4), 0, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), {3});
    for (double q : {0.0, 0.5, 0.9}) {
        const auto log = run_dandelion(g, DandelionParams{q, 0}, truth_for({2}), 1);
        CHECK(log.first_spy[0]->sender == 2);
        CHECK(log.first_spy[0]->spy == 3);
        CHECK(log.first_spy[0]->time == 1.0);
        CHECK_FALSE(log.first_spy[0]->virtual_exit);
    }
}

TEST_CASE("dandelion on a 4-cycle with q = 0 blames the spy's predecessor") {
    const auto g = with_spies(NetworkGraph(TopologySpec::cycle(4), 0, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), {3});
    const auto truth = truth_for({0, 1, 2});
    const auto log = run_dandelion(g, DandelionParams{}, truth, 5);
    for (const auto& t : log.first_spy) CHECK(t->sender == 2);
    for (std::uint64_t s = 0; s < 10; ++s) CHECK(run_dandelion(g, DandelionParams{}, truth, s) == log);
}

TEST_CASE("dandelion with q = 0 ignores the seed on out-degree-one graphs") {
    const auto g = place_adversaries(build_k_approx_line(300, 2, 4), 0.2, 5);
    const auto truth = make_ground_truth(g, 6);
    const auto log = run_dandelion(g, DandelionParams{}, truth, 1);
    check_log_invariants(g, log);
    CHECK(log == run_dandelion(g, DandelionParams{}, truth, 2));
}

TEST_CASE("dandelion recall is the first-hop spy frequency for every q") {
    for (double q : {0.0, 0.25, 0.6}) {
        const auto g = place_adversaries(build_spliced_line(400, 7), 0.2, 8);
        const auto truth = make_ground_truth(g, 9);
        DandelionTrace trace;
        const auto log = run_dandelion(g, DandelionParams{q, 0}, truth, 10, &trace);
        check_log_invariants(g, log);
        for (std::size_t x = 0; x < truth.size(); ++x)
            REQUIRE((log.first_spy[x]->sender == truth.sources[x]) == bool(trace.first_hop_spy[x]));
    }
}

TEST_CASE("dandelion first-spy recall on a dynamic line is p") {
    std::vector<double> recalls;
    for (std::uint64_t t = 0; t < 500; ++t) {
        const auto g = place_adversaries(build_spliced_line(1000, derive_seed(1, t)), 0.2, derive_seed(2, t));
        const auto truth = make_ground_truth(g, derive_seed(3, t));
        const auto log = run_dandelion(g, DandelionParams{}, truth, t);
        recalls.push_back(evaluate_trial(first_spy_estimator(AdversaryView::local(log, g)), truth).recall);
    }
    CHECK(mean_stderr(recalls).mean == Catch::Approx(0.2).margin(0.015));
}

TEST_CASE("dandelion stems stop at tree roots and at the hop cap") {
    // Root 0 <- 1 <- 2, spy 3 -> 0.
    const auto tree = with_spies(NetworkGraph(TopologySpec::d_regular_tree(4, 2), 0, {{1, 0}, {2, 1}, {3, 0}}), {3});
    const auto log = run_dandelion(tree, DandelionParams{}, truth_for({0, 2}), 1);
    CHECK(log.first_spy[0]->virtual_exit);
    CHECK(log.first_spy[0]->sender == 0);
    CHECK(log.first_spy[0]->time == 0.0);
    CHECK(log.first_spy[1]->sender == 0);
    CHECK(log.first_spy[1]->time == 2.0);

    const auto ring = build_topology(TopologySpec::cycle(5), 1);
    const auto capped = run_dandelion(ring, DandelionParams{0.0, 3}, truth_for({0}), 1);
    CHECK(capped.first_spy[0]->virtual_exit);
    CHECK(capped.first_spy[0]->time == 3.0);

    const auto broken = NetworkGraph(TopologySpec::cycle(3), 0, {{0, 1}, {1, 2}});
    CHECK_THROWS(run_dandelion(broken, DandelionParams{}, truth_for({0}), 1));
    CHECK_THROWS(run_dandelion(ring, DandelionParams{1.0, 0}, truth_for({0}), 1));
}
