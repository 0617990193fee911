#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace anonsim {

/// Dense node index in [0, n).
using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class Role : std::uint8_t { Honest, Adversarial };

enum class TopologyKind {
    Cycle,
    SplicedLine,
    KApproxLine,
    RandomRegular,         // param = out-degree; spreading uses the bidirectional union
    UndirectedRegular,     // param = degree; configuration model, simple graph
    DirectedRegular,       // param = in-degree = out-degree
    DirectedDRegularTree,  // param = d; root has d children, other internal nodes d-1
    PerfectDAryTree,       // param = d; every internal node has d children
    Complete,
};

/// Which adjacency a broadcast follows.
enum class Propagation { Directed, Symmetric };

struct TopologySpec {
    TopologyKind kind = TopologyKind::Cycle;
    std::size_t n = 0;
    std::size_t param = 0;

    static TopologySpec cycle(std::size_t n) { return {TopologyKind::Cycle, n, 0}; }
    static TopologySpec spliced_line(std::size_t n) { return {TopologyKind::SplicedLine, n, 0}; }
    static TopologySpec k_approx_line(std::size_t n, std::size_t k) {
        return {TopologyKind::KApproxLine, n, k};
    }
    static TopologySpec random_regular(std::size_t n, std::size_t out_degree = 8) {
        return {TopologyKind::RandomRegular, n, out_degree};
    }
    static TopologySpec undirected_regular(std::size_t n, std::size_t degree) {
        return {TopologyKind::UndirectedRegular, n, degree};
    }
    static TopologySpec directed_regular(std::size_t n, std::size_t degree) {
        return {TopologyKind::DirectedRegular, n, degree};
    }
    static TopologySpec d_regular_tree(std::size_t n, std::size_t d) {
        return {TopologyKind::DirectedDRegularTree, n, d};
    }
    static TopologySpec perfect_tree(std::size_t n, std::size_t d) {
        return {TopologyKind::PerfectDAryTree, n, d};
    }
    static TopologySpec complete(std::size_t n) { return {TopologyKind::Complete, n, 0}; }

    /// Throws TopologyError when the spec violates its invariants.
    void validate() const;

    bool is_tree() const {
        return kind == TopologyKind::DirectedDRegularTree || kind == TopologyKind::PerfectDAryTree;
    }
    bool is_line_family() const {
        return kind == TopologyKind::Cycle || kind == TopologyKind::SplicedLine ||
               kind == TopologyKind::KApproxLine;
    }
    Propagation default_propagation() const {
        return kind == TopologyKind::RandomRegular ? Propagation::Symmetric
                                                   : Propagation::Directed;
    }

    /// Short tag such as "spliced-line" or "k-approx-line(k=4)".
    std::string name() const;

    friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

/// Parse a tag produced by TopologySpec::name(); n is supplied separately.
TopologySpec parse_topology(const std::string& tag, std::size_t n);

class TopologyError : public std::invalid_argument {
public:
    explicit TopologyError(const std::string& what,
                           std::optional<std::size_t> nearest_valid_n = std::nullopt)
        : std::invalid_argument(what), nearest_valid_n_(nearest_valid_n) {}

    /// For PerfectDAryTree size errors, the closest admissible node count.
    std::optional<std::size_t> nearest_valid_n() const { return nearest_valid_n_; }

private:
    std::optional<std::size_t> nearest_valid_n_;
};

/// Directed graph over dense node ids with per-node roles. Adjacency is
/// stored in CSR form; out-lists are kept sorted so equal graphs compare
/// equal regardless of construction order.
class NetworkGraph {
public:
    NetworkGraph() = default;
    NetworkGraph(TopologySpec spec, std::uint64_t seed,
                 std::vector<std::pair<NodeId, NodeId>> edges);

    std::size_t size() const { return roles_.size(); }
    const TopologySpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

    std::span<const NodeId> out_neighbors(NodeId v) const { return row(out_off_, out_adj_, v); }
    std::span<const NodeId> in_neighbors(NodeId v) const { return row(in_off_, in_adj_, v); }
    /// Union of in- and out-neighbors.
    std::span<const NodeId> symmetric_neighbors(NodeId v) const {
        return row(sym_off_, sym_adj_, v);
    }

    /// Nodes a broadcast at v forwards to.
    std::span<const NodeId> forward_neighbors(NodeId v, Propagation mode) const {
        return mode == Propagation::Directed ? out_neighbors(v) : symmetric_neighbors(v);
    }
    /// Nodes that forward to v under the same propagation mode.
    std::span<const NodeId> backward_neighbors(NodeId v, Propagation mode) const {
        return mode == Propagation::Directed ? in_neighbors(v) : symmetric_neighbors(v);
    }

    std::size_t out_degree(NodeId v) const { return out_off_[v + 1] - out_off_[v]; }
    std::size_t in_degree(NodeId v) const { return in_off_[v + 1] - in_off_[v]; }
    std::size_t edge_count() const { return out_adj_.size(); }

    Role role(NodeId v) const { return roles_[v]; }
    bool is_spy(NodeId v) const { return roles_[v] == Role::Adversarial; }
    const std::vector<Role>& roles() const { return roles_; }
    void set_roles(std::vector<Role> roles);

    std::vector<NodeId> honest_nodes() const;
    std::vector<NodeId> spies() const;
    std::size_t spy_count() const;
    std::size_t honest_count() const { return size() - spy_count(); }

    /// All directed edges sorted by (from, to).
    std::vector<std::pair<NodeId, NodeId>> edges() const;

    friend bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
        return a.spec_ == b.spec_ && a.seed_ == b.seed_ && a.roles_ == b.roles_ &&
               a.out_off_ == b.out_off_ && a.out_adj_ == b.out_adj_;
    }

private:
    static std::span<const NodeId> row(const std::vector<std::size_t>& off,
                                       const std::vector<NodeId>& adj, NodeId v) {
        return {adj.data() + off[v], off[v + 1] - off[v]};
    }

    TopologySpec spec_;
    std::uint64_t seed_ = 0;
    std::vector<Role> roles_;
    std::vector<std::size_t> out_off_{0}, in_off_{0}, sym_off_{0};
    std::vector<NodeId> out_adj_, in_adj_, sym_adj_;
};

NetworkGraph build_topology(const TopologySpec& spec, std::uint64_t seed);

/// Each node, in uniformly random join order, samples k distinct candidates
/// from the other nodes and links to one of minimum current in-degree.
NetworkGraph build_k_approx_line(std::size_t n, std::size_t k, std::uint64_t seed);

/// Sequential splicing from a two-node seed circuit: each joining node picks
/// a uniform circuit member u and inserts itself between u and u's successor.
NetworkGraph build_spliced_line(std::size_t n, std::uint64_t seed);

/// floor(n * p), guarded against representation error (5500 * 0.15 -> 825).
std::size_t spy_count_for(std::size_t n, double p);

/// Copy of g with exactly floor(n p) adversarial nodes chosen uniformly.
NetworkGraph place_adversaries(const NetworkGraph& g, double p, std::uint64_t seed);

/// True when the out-successor function is one cycle through every node.
bool is_single_cycle(const NetworkGraph& g);

enum class WardSemantics { DandelionPath, FloodingReachability };

struct Ward {
    NodeId head = kNoNode;
    std::vector<NodeId> members;  // sorted, includes head
    /// First adversary reached through the head; kNoNode when the path ends
    /// at an honest sink or loops through a spy-free cycle.
    NodeId exit_spy = kNoNode;
};

/// Wards sorted by head. DandelionPath requires honest out-degree <= 1.
std::vector<Ward> compute_wards(const NetworkGraph& g, WardSemantics semantics);

/// For each node, the head of the DandelionPath ward containing it (kNoNode
/// for spies).
std::vector<NodeId> dandelion_exit_heads(const NetworkGraph& g);

struct DegreeStats {
    std::map<std::size_t, std::size_t> in_degree_histogram;
    std::size_t max_in_degree = 0;
    std::size_t total_degree_sum = 0;  // sum of in + out degrees = 2 * edges
    std::size_t node_count = 0;

    double mean_total_degree() const {
        return node_count == 0 ? 0.0
                               : static_cast<double>(total_degree_sum) /
                                     static_cast<double>(node_count);
    }
    double fraction_with_in_degree(std::size_t d) const;
};

DegreeStats degree_stats(const NetworkGraph& g);

}  // namespace anonsim
