#include "anonsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "anonsim/rng.hpp"

namespace anonsim {

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

std::size_t perfect_tree_size(std::size_t d, std::size_t depth) {
    std::size_t total = 0, level = 1;
    for (std::size_t h = 0; h <= depth; ++h) {
        total += level;
        level *= d;
    }
    return total;
}

EdgeList relabel(const EdgeList& edges, std::size_t n, Rng& rng) {
    const auto perm = rng.permutation(n);
    EdgeList out;
    out.reserve(edges.size());
    for (auto [a, b] : edges) out.emplace_back(perm[a], perm[b]);
    return out;
}

// Children are attached breadth-first; the root takes root_children, every
// later node up to other_children, until n nodes exist. Edges point to the parent.
EdgeList bfs_tree(std::size_t n, std::size_t root_children, std::size_t other_children) {
    EdgeList edges;
    edges.reserve(n - 1);
    std::size_t next = 1;
    for (std::size_t parent = 0; next < n; ++parent) {
        const std::size_t kids = parent == 0 ? root_children : other_children;
        for (std::size_t c = 0; c < kids && next < n; ++c, ++next) {
            edges.emplace_back(static_cast<NodeId>(next), static_cast<NodeId>(parent));
        }
    }
    return edges;
}

bool has_neighbor(const std::vector<std::vector<NodeId>>& adj, NodeId a, NodeId b) {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
}

// Steger-Wormald style pairing: repeatedly join two random free points whose
// vertices are distinct and not yet adjacent; restart when stuck.
EdgeList undirected_regular_edges(std::size_t n, std::size_t d, Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<NodeId> points;
        points.reserve(n * d);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < d; ++i) points.push_back(static_cast<NodeId>(v));
        std::vector<std::vector<NodeId>> adj(n);
        bool stuck = false;
        while (!points.empty() && !stuck) {
            std::size_t failures = 0;
            while (true) {
                const auto i = static_cast<std::size_t>(rng.uniform_below(points.size()));
                const auto j = static_cast<std::size_t>(rng.uniform_below(points.size()));
                const NodeId a = points[i], b = points[j];
                if (i != j && a != b && !has_neighbor(adj, a, b)) {
                    adj[a].push_back(b);
                    adj[b].push_back(a);
                    const std::size_t hi = std::max(i, j), lo = std::min(i, j);
                    points[hi] = points.back();
                    points.pop_back();
                    points[lo] = points.back();
                    points.pop_back();
                    break;
                }
                if (++failures < 64) continue;
                bool any = false;
                for (std::size_t x = 0; x < points.size() && !any; ++x)
                    for (std::size_t y = x + 1; y < points.size() && !any; ++y)
                        any = points[x] != points[y] && !has_neighbor(adj, points[x], points[y]);
                if (!any) {
                    stuck = true;
                    break;
                }
                failures = 0;
            }
        }
        if (stuck) continue;
        EdgeList edges;
        for (std::size_t v = 0; v < n; ++v)
            for (NodeId u : adj[v]) edges.emplace_back(static_cast<NodeId>(v), u);
        return edges;
    }
    throw TopologyError("undirected regular graph: pairing failed repeatedly");
}

// Out-stubs are paired with in-stubs, rejecting self-loops and repeated arcs.
EdgeList directed_regular_edges(std::size_t n, std::size_t d, Rng& rng) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<NodeId> outs, ins;
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < d; ++i) {
                outs.push_back(static_cast<NodeId>(v));
                ins.push_back(static_cast<NodeId>(v));
            }
        std::vector<std::vector<NodeId>> adj(n);
        bool stuck = false;
        while (!outs.empty() && !stuck) {
            std::size_t failures = 0;
            while (true) {
                const auto i = static_cast<std::size_t>(rng.uniform_below(outs.size()));
                const auto j = static_cast<std::size_t>(rng.uniform_below(ins.size()));
                const NodeId a = outs[i], b = ins[j];
                if (a != b && !has_neighbor(adj, a, b)) {
                    adj[a].push_back(b);
                    outs[i] = outs.back();
                    outs.pop_back();
                    ins[j] = ins.back();
                    ins.pop_back();
                    break;
                }
                if (++failures < 64) continue;
                bool any = false;
                for (std::size_t x = 0; x < outs.size() && !any; ++x)
                    for (std::size_t y = 0; y < ins.size() && !any; ++y)
                        any = outs[x] != ins[y] && !has_neighbor(adj, outs[x], ins[y]);
                if (!any) {
                    stuck = true;
                    break;
                }
                failures = 0;
            }
        }
        if (stuck) continue;
        EdgeList edges;
        for (std::size_t v = 0; v < n; ++v)
            for (NodeId u : adj[v]) edges.emplace_back(static_cast<NodeId>(v), u);
        return edges;
    }
    throw TopologyError("directed regular graph: pairing failed repeatedly");
}

void build_csr(std::size_t n, const EdgeList& edges, bool by_source,
               std::vector<std::size_t>& off, std::vector<NodeId>& adj) {
    off.assign(n + 1, 0);
    for (auto [a, b] : edges) ++off[(by_source ? a : b) + 1];
    for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
    adj.assign(edges.size(), 0);
    std::vector<std::size_t> cursor(off.begin(), off.end() - 1);
    for (auto [a, b] : edges) {
        const NodeId key = by_source ? a : b;
        adj[cursor[key]++] = by_source ? b : a;
    }
    for (std::size_t i = 0; i < n; ++i) std::sort(adj.begin() + off[i], adj.begin() + off[i + 1]);
}

}  // namespace

// ---------------------------------------------------------------------------
// TopologySpec

void TopologySpec::validate() const {
    if (n < 3) throw TopologyError("topology needs n >= 3, got " + std::to_string(n));
    switch (kind) {
        case TopologyKind::Cycle:
        case TopologyKind::SplicedLine:
        case TopologyKind::Complete:
            return;
        case TopologyKind::KApproxLine:
            if (param < 1 || param >= n)
                throw TopologyError("k-approximate line needs 1 <= k <= n-1, got k=" +
                                    std::to_string(param));
            return;
        case TopologyKind::RandomRegular:
        case TopologyKind::DirectedRegular:
            if (param < 1 || param >= n)
                throw TopologyError("regular graph needs 1 <= degree <= n-1");
            return;
        case TopologyKind::UndirectedRegular:
            if (param < 1 || param >= n)
                throw TopologyError("regular graph needs 1 <= degree <= n-1");
            if ((n * param) % 2 != 0)
                throw TopologyError("undirected regular graph needs n * degree even");
            return;
        case TopologyKind::DirectedDRegularTree:
            if (param < 2) throw TopologyError("tree needs d >= 2");
            return;
        case TopologyKind::PerfectDAryTree: {
            if (param < 2) throw TopologyError("tree needs d >= 2");
            std::size_t best = perfect_tree_size(param, 1);
            for (std::size_t h = 1;; ++h) {
                const std::size_t size = perfect_tree_size(param, h);
                if (size == n) return;
                const auto dist = [&](std::size_t s) { return s > n ? s - n : n - s; };
                if (dist(size) < dist(best)) best = size;
                if (size > n) break;
            }
            throw TopologyError("perfect " + std::to_string(param) + "-ary tree cannot have n=" +
                                    std::to_string(n) + " nodes; nearest valid n is " +
                                    std::to_string(best),
                                best);
        }
    }
}

std::string TopologySpec::name() const {
    switch (kind) {
        case TopologyKind::Cycle: return "cycle";
        case TopologyKind::SplicedLine: return "spliced-line";
        case TopologyKind::KApproxLine: return "k-approx-line(k=" + std::to_string(param) + ")";
        case TopologyKind::RandomRegular: return "random-regular(out=" + std::to_string(param) + ")";
        case TopologyKind::UndirectedRegular:
            return "undirected-regular(d=" + std::to_string(param) + ")";
        case TopologyKind::DirectedRegular:
            return "directed-regular(d=" + std::to_string(param) + ")";
        case TopologyKind::DirectedDRegularTree:
            return "d-regular-tree(d=" + std::to_string(param) + ")";
        case TopologyKind::PerfectDAryTree: return "perfect-tree(d=" + std::to_string(param) + ")";
        case TopologyKind::Complete: return "complete";
    }
    return "unknown";
}

TopologySpec parse_topology(const std::string& tag, std::size_t n) {
    const auto paren = tag.find('(');
    const std::string base = tag.substr(0, paren);
    std::size_t param = 0;
    if (paren != std::string::npos) {
        const auto eq = tag.find('=', paren);
        const auto close = tag.find(')', paren);
        if (eq == std::string::npos || close == std::string::npos || close < eq)
            throw TopologyError("malformed topology tag '" + tag + "'");
        param = std::stoul(tag.substr(eq + 1, close - eq - 1));
    }
    static const std::pair<const char*, TopologyKind> kinds[] = {
        {"cycle", TopologyKind::Cycle},
        {"spliced-line", TopologyKind::SplicedLine},
        {"k-approx-line", TopologyKind::KApproxLine},
        {"random-regular", TopologyKind::RandomRegular},
        {"undirected-regular", TopologyKind::UndirectedRegular},
        {"directed-regular", TopologyKind::DirectedRegular},
        {"d-regular-tree", TopologyKind::DirectedDRegularTree},
        {"perfect-tree", TopologyKind::PerfectDAryTree},
        {"complete", TopologyKind::Complete},
    };
    for (const auto& [name, kind] : kinds) {
        if (base != name) continue;
        if (kind == TopologyKind::RandomRegular && paren == std::string::npos)
            return TopologySpec::random_regular(n);
        return TopologySpec{kind, n, param};
    }
    throw TopologyError("unknown topology '" + tag + "'");
}

// ---------------------------------------------------------------------------
// NetworkGraph

NetworkGraph::NetworkGraph(TopologySpec spec, std::uint64_t seed, EdgeList edges)
    : spec_(spec), seed_(seed), roles_(spec.n, Role::Honest) {
    const std::size_t n = spec.n;
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto [a, b] = edges[i];
        if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self-loop at node " + std::to_string(a));
        if (i > 0 && edges[i - 1] == edges[i])
            throw std::invalid_argument("duplicate edge " + std::to_string(a) + "->" +
                                        std::to_string(b));
    }
    build_csr(n, edges, true, out_off_, out_adj_);
    build_csr(n, edges, false, in_off_, in_adj_);

    EdgeList sym;
    sym.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        sym.emplace_back(a, b);
        sym.emplace_back(b, a);
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
    build_csr(n, sym, true, sym_off_, sym_adj_);
}

void NetworkGraph::set_roles(std::vector<Role> roles) {
    if (roles.size() != size()) throw std::invalid_argument("role vector size mismatch");
    roles_ = std::move(roles);
}

std::vector<NodeId> NetworkGraph::honest_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < size(); ++v)
        if (!is_spy(v)) out.push_back(v);
    return out;
}

std::vector<NodeId> NetworkGraph::spies() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < size(); ++v)
        if (is_spy(v)) out.push_back(v);
    return out;
}

std::size_t NetworkGraph::spy_count() const {
    return static_cast<std::size_t>(
        std::count(roles_.begin(), roles_.end(), Role::Adversarial));
}

EdgeList NetworkGraph::edges() const {
    EdgeList out;
    out.reserve(edge_count());
    for (NodeId v = 0; v < size(); ++v)
        for (NodeId u : out_neighbors(v)) out.emplace_back(v, u);
    return out;
}

// ---------------------------------------------------------------------------
// Construction

NetworkGraph build_k_approx_line(std::size_t n, std::size_t k, std::uint64_t seed) {
    const TopologySpec spec = TopologySpec::k_approx_line(n, k);
    spec.validate();
    Rng rng(seed);
    const auto order = rng.permutation(n);
    std::vector<std::size_t> in_degree(n, 0);
    EdgeList edges;
    edges.reserve(n);
    for (NodeId v : order) {
        const auto candidates = rng.sample_distinct(n, k, v);
        NodeId chosen = kNoNode;
        std::size_t best = 0, ties = 0;
        for (NodeId c : candidates) {
            if (chosen == kNoNode || in_degree[c] < best) {
                chosen = c;
                best = in_degree[c];
                ties = 1;
            } else if (in_degree[c] == best && rng.uniform_below(++ties) == 0) {
                chosen = c;
            }
        }
        ++in_degree[chosen];
        edges.emplace_back(v, chosen);
    }
    return NetworkGraph(spec, seed, std::move(edges));
}

NetworkGraph build_spliced_line(std::size_t n, std::uint64_t seed) {
    const TopologySpec spec = TopologySpec::spliced_line(n);
    spec.validate();
    Rng rng(seed);
    const auto order = rng.permutation(n);
    std::vector<NodeId> succ(n, kNoNode);
    std::vector<NodeId> circuit{order[0], order[1]};
    succ[order[0]] = order[1];
    succ[order[1]] = order[0];
    for (std::size_t i = 2; i < n; ++i) {
        const NodeId v = order[i];
        const NodeId u = circuit[rng.uniform_below(circuit.size())];
        succ[v] = succ[u];
        succ[u] = v;
        circuit.push_back(v);
    }
    EdgeList edges;
    edges.reserve(n);
    for (NodeId v = 0; v < n; ++v) edges.emplace_back(v, succ[v]);
    return NetworkGraph(spec, seed, std::move(edges));
}

NetworkGraph build_topology(const TopologySpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t n = spec.n;
    switch (spec.kind) {
        case TopologyKind::SplicedLine: return build_spliced_line(n, seed);
        case TopologyKind::KApproxLine: return build_k_approx_line(n, spec.param, seed);
        default: break;
    }
    Rng rng(seed);
    EdgeList edges;
    switch (spec.kind) {
        case TopologyKind::Cycle: {
            EdgeList canonical;
            for (std::size_t v = 0; v < n; ++v)
                canonical.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>((v + 1) % n));
            edges = relabel(canonical, n, rng);
            break;
        }
        case TopologyKind::RandomRegular:
            for (std::size_t v = 0; v < n; ++v)
                for (NodeId u : rng.sample_distinct(n, spec.param, v))
                    edges.emplace_back(static_cast<NodeId>(v), u);
            break;
        case TopologyKind::UndirectedRegular:
            edges = undirected_regular_edges(n, spec.param, rng);
            break;
        case TopologyKind::DirectedRegular:
            edges = directed_regular_edges(n, spec.param, rng);
            break;
        case TopologyKind::DirectedDRegularTree:
            edges = relabel(bfs_tree(n, spec.param, spec.param - 1), n, rng);
            break;
        case TopologyKind::PerfectDAryTree:
            edges = relabel(bfs_tree(n, spec.param, spec.param), n, rng);
            break;
        case TopologyKind::Complete:
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t u = 0; u < n; ++u)
                    if (u != v) edges.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(u));
            break;
        default: break;
    }
    return NetworkGraph(spec, seed, std::move(edges));
}

std::size_t spy_count_for(std::size_t n, double p) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * p + 1e-9));
}

NetworkGraph place_adversaries(const NetworkGraph& g, double p, std::uint64_t seed) {
    const std::size_t n = g.size();
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("spy fraction p must lie in (0,1)");
    const std::size_t spies = spy_count_for(n, p);
    if (spies == 0 || spies >= n)
        throw std::invalid_argument("floor(n p) = " + std::to_string(spies) +
                                    " leaves no spies or no honest nodes (n=" + std::to_string(n) +
                                    ")");
    Rng rng(seed);
    auto perm = rng.permutation(n);
    std::vector<Role> roles(n, Role::Honest);
    for (std::size_t i = 0; i < spies; ++i) roles[perm[i]] = Role::Adversarial;
    NetworkGraph out = g;
    out.set_roles(std::move(roles));
    return out;
}

bool is_single_cycle(const NetworkGraph& g) {
    const std::size_t n = g.size();
    if (n == 0) return false;
    for (NodeId v = 0; v < n; ++v)
        if (g.out_degree(v) != 1 || g.in_degree(v) != 1) return false;
    NodeId x = 0;
    for (std::size_t step = 1; step <= n; ++step) {
        x = g.out_neighbors(x)[0];
        if (x == 0) return step == n;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Wards

std::vector<NodeId> dandelion_exit_heads(const NetworkGraph& g) {
    const std::size_t n = g.size();
    std::vector<NodeId> head(n, kNoNode);
    std::vector<std::uint8_t> state(n, 0);  // 0 new, 1 on current walk, 2 resolved
    std::vector<std::size_t> position(n, 0);
    std::vector<NodeId> walk;
    for (NodeId start = 0; start < n; ++start) {
        if (g.is_spy(start) || state[start] == 2) continue;
        walk.clear();
        NodeId x = start, resolved = kNoNode;
        while (true) {
            if (state[x] == 2) {
                resolved = head[x];
                break;
            }
            if (state[x] == 1) {
                // Spy-free cycle: its lowest id becomes the designated head.
                const std::size_t from = position[x];
                const NodeId designated = *std::min_element(walk.begin() + from, walk.end());
                for (std::size_t i = from; i < walk.size(); ++i) {
                    head[walk[i]] = designated;
                    state[walk[i]] = 2;
                }
                walk.resize(from);
                resolved = designated;
                break;
            }
            if (g.out_degree(x) > 1)
                throw std::invalid_argument("dandelion wards need honest out-degree <= 1; node " +
                                            std::to_string(x) + " has " +
                                            std::to_string(g.out_degree(x)));
            state[x] = 1;
            position[x] = walk.size();
            walk.push_back(x);
            if (g.out_degree(x) == 0 || g.is_spy(g.out_neighbors(x)[0])) {
                resolved = x;
                break;
            }
            x = g.out_neighbors(x)[0];
        }
        for (NodeId w : walk) {
            head[w] = resolved;
            state[w] = 2;
        }
    }
    return head;
}

namespace {

std::vector<Ward> group_wards(const NetworkGraph& g, const std::vector<NodeId>& head_of,
                              bool record_exit) {
    std::map<NodeId, Ward> wards;
    for (NodeId v = 0; v < g.size(); ++v) {
        if (head_of[v] == kNoNode) continue;
        Ward& w = wards[head_of[v]];
        w.head = head_of[v];
        w.members.push_back(v);
    }
    std::vector<Ward> out;
    out.reserve(wards.size());
    for (auto& [h, w] : wards) {
        if (record_exit && g.out_degree(h) == 1 && g.is_spy(g.out_neighbors(h)[0]))
            w.exit_spy = g.out_neighbors(h)[0];
        out.push_back(std::move(w));
    }
    return out;
}

// Honest nodes that deliver v's flooded message to the adversary first.
class FirstDeliverySearch {
public:
    explicit FirstDeliverySearch(const NetworkGraph& g)
        : g_(g), mode_(g.spec().default_propagation()), stamp_(g.size(), 0) {}

    std::vector<NodeId> operator()(NodeId source) {
        ++generation_;
        std::vector<NodeId> level{source}, next;
        stamp_[source] = generation_;
        while (!level.empty()) {
            std::vector<NodeId> deliverers;
            for (NodeId u : level) {
                for (NodeId w : g_.forward_neighbors(u, mode_)) {
                    if (g_.is_spy(w)) {
                        deliverers.push_back(u);
                        break;
                    }
                }
            }
            if (!deliverers.empty()) return deliverers;
            next.clear();
            for (NodeId u : level)
                for (NodeId w : g_.forward_neighbors(u, mode_))
                    if (stamp_[w] != generation_) {
                        stamp_[w] = generation_;
                        next.push_back(w);
                    }
            level.swap(next);
        }
        return {};
    }

private:
    const NetworkGraph& g_;
    Propagation mode_;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t generation_ = 0;
};

}  // namespace

std::vector<Ward> compute_wards(const NetworkGraph& g, WardSemantics semantics) {
    if (semantics == WardSemantics::DandelionPath)
        return group_wards(g, dandelion_exit_heads(g), true);

    std::vector<NodeId> head_of(g.size(), kNoNode);
    FirstDeliverySearch search(g);
    for (NodeId v = 0; v < g.size(); ++v) {
        if (g.is_spy(v)) continue;
        const auto deliverers = search(v);
        if (deliverers.size() == 1) head_of[v] = deliverers.front();
    }
    return group_wards(g, head_of, false);
}

// ---------------------------------------------------------------------------
// Degrees

double DegreeStats::fraction_with_in_degree(std::size_t d) const {
    const auto it = in_degree_histogram.find(d);
    if (it == in_degree_histogram.end() || node_count == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(node_count);
}

DegreeStats degree_stats(const NetworkGraph& g) {
    DegreeStats stats;
    stats.node_count = g.size();
    for (NodeId v = 0; v < g.size(); ++v) {
        const std::size_t d = g.in_degree(v);
        ++stats.in_degree_histogram[d];
        stats.max_in_degree = std::max(stats.max_in_degree, d);
    }
    stats.total_degree_sum = 2 * g.edge_count();
    return stats;
}

}  // namespace anonsim
