#include "anonsim/spreading.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "anonsim/rng.hpp"

namespace anonsim {

GroundTruth make_ground_truth(const NetworkGraph& g, std::uint64_t seed) {
    Rng rng(seed);
    GroundTruth truth;
    truth.sources = g.honest_nodes();
    rng.shuffle(truth.sources);
    std::unordered_set<std::uint64_t> used;
    truth.txs.reserve(truth.sources.size());
    while (truth.txs.size() < truth.sources.size()) {
        const std::uint64_t nonce = rng.next_u64();
        if (used.insert(nonce).second) truth.txs.push_back(TxId{nonce});
    }
    return truth;
}

std::string protocol_name(ProtocolTag tag) {
    switch (tag) {
        case ProtocolTag::Flooding: return "flooding";
        case ProtocolTag::Diffusion: return "diffusion";
        case ProtocolTag::DiffusionByProxy: return "diffusion-by-proxy";
        case ProtocolTag::Dandelion: return "dandelion";
    }
    return "unknown";
}

std::uint32_t ObservationLog::spies_in_round(std::size_t tx, std::size_t round) const {
    if (tx >= round_spy_counts.size()) return 0;
    const auto& counts = round_spy_counts[tx];
    return round < counts.size() ? counts[round] : 0;
}

namespace {

ObservationLog empty_log(ProtocolTag protocol, const GroundTruth& truth) {
    ObservationLog log;
    log.protocol = protocol;
    log.txs = truth.txs;
    log.first_spy.assign(truth.size(), std::nullopt);
    return log;
}

[[noreturn]] void throw_unobserved(const std::vector<NodeId>& sources) {
    std::ostringstream msg;
    msg << "messages from " << sources.size() << " source(s) never reach a spy:";
    for (std::size_t i = 0; i < sources.size() && i < 10; ++i) msg << ' ' << sources[i];
    if (sources.size() > 10) msg << " ...";
    throw std::runtime_error(msg.str());
}

}  // namespace

ObservationLog run_flooding(const NetworkGraph& g, const GroundTruth& truth,
                            const FloodingOptions& options) {
    const Propagation mode = options.mode.value_or(g.spec().default_propagation());
    const std::size_t n = g.size();
    ObservationLog log = empty_log(ProtocolTag::Flooding, truth);
    log.round_spy_counts.resize(truth.size());

    std::vector<std::uint64_t> stamp(n, 0);
    std::vector<std::size_t> round_of(n, 0);
    std::vector<NodeId> frontier, next;
    std::vector<NodeId> unobserved;

    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::uint64_t gen = i + 1;
        const NodeId source = truth.sources[i];
        auto& counts = log.round_spy_counts[i];
        frontier.assign(1, source);
        stamp[source] = gen;
        round_of[source] = 0;
        std::optional<std::size_t> first_round;
        std::optional<ObservationTuple> first;

        for (std::size_t round = 1; !frontier.empty(); ++round) {
            if (first_round && round > *first_round + options.rounds_after_first_spy) break;
            next.clear();
            for (NodeId u : frontier) {
                for (NodeId w : g.forward_neighbors(u, mode)) {
                    if (stamp[w] != gen) {
                        stamp[w] = gen;
                        round_of[w] = round;
                        next.push_back(w);
                        if (g.is_spy(w)) {
                            if (counts.size() <= round) counts.resize(round + 1, 0);
                            ++counts[round];
                        }
                    } else if (round_of[w] != round) {
                        continue;
                    }
                    if (!g.is_spy(w) || g.is_spy(u)) continue;
                    const ObservationTuple t{static_cast<std::uint32_t>(i), w, u,
                                             static_cast<double>(round), false};
                    log.full.push_back(t);
                    if (!first_round || (round == *first_round &&
                                         std::pair(w, u) < std::pair(first->spy, first->sender))) {
                        first_round = round;
                        first = t;
                    }
                }
            }
            frontier.swap(next);
        }
        if (!first) unobserved.push_back(source);
        log.first_spy[i] = first;
    }
    if (!unobserved.empty()) throw_unobserved(unobserved);
    return log;
}

EdgeDelay exponential_delays(std::uint64_t seed) {
    return [seed](std::size_t tx, NodeId from, NodeId to) {
        const double u = bits_to_unit(derive_seed(seed, tx, from, to));
        return -std::log1p(-u);
    };
}

ObservationLog run_diffusion(const NetworkGraph& g, const GroundTruth& truth, std::uint64_t seed,
                             const DiffusionOptions& options) {
    return run_diffusion(g, truth, exponential_delays(seed), options);
}

ObservationLog run_diffusion(const NetworkGraph& g, const GroundTruth& truth,
                             const EdgeDelay& delay, const DiffusionOptions& options) {
    const Propagation mode = options.mode.value_or(g.spec().default_propagation());
    const std::size_t n = g.size();
    ObservationLog log = empty_log(ProtocolTag::Diffusion, truth);

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<NodeId> pred(n, kNoNode);
    std::vector<bool> settled(n, false);
    std::vector<NodeId> touched;
    std::vector<NodeId> unobserved;
    using Entry = std::pair<double, NodeId>;

    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (NodeId v : touched) {
            dist[v] = kInf;
            pred[v] = kNoNode;
            settled[v] = false;
        }
        touched.clear();
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        const NodeId source = truth.sources[i];
        dist[source] = 0.0;
        touched.push_back(source);
        heap.emplace(0.0, source);
        const std::size_t full_begin = log.full.size();
        std::optional<double> first_time;

        while (!heap.empty()) {
            const auto [t, v] = heap.top();
            heap.pop();
            if (settled[v]) continue;
            settled[v] = true;
            if (g.is_spy(v) && pred[v] != kNoNode && !g.is_spy(pred[v])) {
                const ObservationTuple tuple{static_cast<std::uint32_t>(i), v, pred[v], t, false};
                if (!first_time) {
                    first_time = t;
                    log.first_spy[i] = tuple;
                }
                log.full.push_back(tuple);
                if (options.first_spy_only) break;
            }
            for (NodeId w : g.forward_neighbors(v, mode)) {
                if (settled[w]) continue;
                const double nd = t + delay(i, v, w);
                if (nd < dist[w]) {
                    if (dist[w] == kInf) touched.push_back(w);
                    dist[w] = nd;
                    pred[w] = v;
                    heap.emplace(nd, w);
                }
            }
        }
        if (!first_time) {
            unobserved.push_back(source);
            continue;
        }
        for (std::size_t k = full_begin; k < log.full.size(); ++k) log.full[k].time -= *first_time;
        log.first_spy[i]->time = 0.0;
    }
    if (!unobserved.empty()) throw_unobserved(unobserved);
    return log;
}

ObservationLog run_diffusion_by_proxy(const NetworkGraph& roster, const GroundTruth& truth,
                                      std::uint64_t seed, ProxyTrace* trace) {
    const std::size_t n = roster.size();
    if (n < 2 || roster.spy_count() == 0)
        throw std::invalid_argument("diffusion-by-proxy needs at least two nodes and one spy");
    ObservationLog log = empty_log(ProtocolTag::DiffusionByProxy, truth);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        Rng rng(derive_seed(seed, i));
        NodeId current = truth.sources[i];
        for (std::size_t hop = 1;; ++hop) {
            auto next = static_cast<NodeId>(rng.uniform_below(n - 1));
            if (next >= current) ++next;
            if (trace) ++trace->hops;
            if (roster.is_spy(next)) {
                if (trace) ++trace->spy_hits;
                const ObservationTuple t{static_cast<std::uint32_t>(i), next, current,
                                         static_cast<double>(hop), false};
                log.first_spy[i] = t;
                log.full.push_back(t);
                break;
            }
            current = next;
        }
    }
    return log;
}

void DandelionParams::validate() const {
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("dandelion q must lie in [0,1)");
}

ObservationLog run_dandelion(const NetworkGraph& anon_graph, const DandelionParams& params,
                             const GroundTruth& truth, std::uint64_t seed, DandelionTrace* trace) {
    params.validate();
    const bool sinks_allowed = anon_graph.spec().is_tree();
    for (NodeId v = 0; v < anon_graph.size(); ++v) {
        if (!anon_graph.is_spy(v) && anon_graph.out_degree(v) == 0 && !sinks_allowed)
            throw std::invalid_argument("honest node " + std::to_string(v) +
                                        " has no out-neighbor in the anonymity graph");
    }
    const std::size_t limit = params.hop_limit(anon_graph.size());
    ObservationLog log = empty_log(ProtocolTag::Dandelion, truth);
    if (trace) trace->first_hop_spy.assign(truth.size(), false);

    for (std::size_t i = 0; i < truth.size(); ++i) {
        Rng rng(derive_seed(seed, i));
        NodeId head = truth.sources[i];
        ObservationTuple t{static_cast<std::uint32_t>(i), kVirtualSpy, head, 0.0, true};
        for (std::size_t hop = 1;; ++hop) {
            const auto outs = anon_graph.out_neighbors(head);
            if (outs.empty()) break;
            const NodeId next =
                outs.size() == 1 ? outs[0] : outs[rng.uniform_below(outs.size())];
            if (anon_graph.is_spy(next)) {
                t = {static_cast<std::uint32_t>(i), next, head, static_cast<double>(hop), false};
                if (trace && hop == 1) trace->first_hop_spy[i] = true;
                break;
            }
            head = next;
            t = {static_cast<std::uint32_t>(i), kVirtualSpy, head, static_cast<double>(hop), true};
            if (hop >= limit) break;
            if (params.q > 0.0 && rng.bernoulli(params.q)) break;
        }
        log.first_spy[i] = t;
        log.full.push_back(t);
    }
    return log;
}

}  // namespace anonsim
