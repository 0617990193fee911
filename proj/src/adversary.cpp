#include "anonsim/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "anonsim/matching.hpp"
#include "anonsim/rng.hpp"

namespace anonsim {

// ---------------------------------------------------------------------------
// Views

LocalNeighborhood LocalNeighborhood::observe(const NetworkGraph& g) {
    LocalNeighborhood local;
    local.roster_size = g.size();
    local.spy_flags.assign(g.size(), false);
    for (NodeId s : g.spies()) {
        local.spy_flags[s] = true;
        const auto outs = g.out_neighbors(s);
        const auto ins = g.in_neighbors(s);
        local.spy_out[s].assign(outs.begin(), outs.end());
        local.spy_in[s].assign(ins.begin(), ins.end());
    }
    return local;
}

std::vector<NodeId> LocalNeighborhood::honest_nodes() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < roster_size; ++v)
        if (!spy_flags[v]) out.push_back(v);
    return out;
}

const NetworkGraph& AdversaryView::graph() const {
    if (!graph_) throw std::invalid_argument("estimator needs full graph knowledge");
    return *graph_;
}

const LocalNeighborhood& AdversaryView::neighborhood() const {
    if (!local_) throw std::invalid_argument("estimator needs a local-neighborhood view");
    return *local_;
}

std::size_t AdversaryView::node_count() const {
    return graph_ ? graph_->size() : local_->roster_size;
}

bool AdversaryView::is_spy(NodeId v) const {
    return graph_ ? graph_->is_spy(v) : local_->is_spy(v);
}

std::vector<NodeId> AdversaryView::honest_nodes() const {
    return graph_ ? graph_->honest_nodes() : local_->honest_nodes();
}

// ---------------------------------------------------------------------------
// PosteriorModel

PosteriorModel::PosteriorModel(std::vector<NodeId> nodes, std::vector<TxId> txs)
    : nodes_(std::move(nodes)), txs_(std::move(txs)), weights_(nodes_.size() * txs_.size(), 0.0) {
    if (!std::is_sorted(nodes_.begin(), nodes_.end()))
        throw std::invalid_argument("posterior nodes must be sorted");
}

std::optional<std::size_t> PosteriorModel::index_of(NodeId v) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
    if (it == nodes_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

double PosteriorModel::weight(std::size_t tx, NodeId v) const {
    const auto idx = index_of(v);
    return idx ? at(tx, *idx) : 0.0;
}

void PosteriorModel::validate(double tol) const {
    for (std::size_t x = 0; x < txs_.size(); ++x) {
        double sum = 0.0;
        for (double w : column(x)) {
            if (!(w >= 0.0)) throw std::invalid_argument("posterior has a negative or NaN weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > tol)
            throw std::invalid_argument("posterior column " + std::to_string(x) + " sums to " +
                                        std::to_string(sum));
    }
}

double PosteriorModel::max_abs_difference(const PosteriorModel& other) const {
    if (nodes_ != other.nodes_ || txs_ != other.txs_)
        throw std::invalid_argument("posterior models cover different nodes or txs");
    double worst = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i)
        worst = std::max(worst, std::abs(weights_[i] - other.weights_[i]));
    return worst;
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

/// Connected components of the bipartite support {(tx, node) : weight > 0}.
struct Component {
    std::vector<std::size_t> txs;
    std::vector<std::size_t> nodes;
};

template <typename Positive>
std::vector<Component> support_components(std::size_t tx_count, std::size_t node_count,
                                          Positive positive) {
    DisjointSets sets(tx_count + node_count);
    for (std::size_t x = 0; x < tx_count; ++x)
        for (std::size_t v = 0; v < node_count; ++v)
            if (positive(x, v)) sets.unite(x, tx_count + v);
    std::map<std::size_t, Component> by_root;
    for (std::size_t x = 0; x < tx_count; ++x) by_root[sets.find(x)].txs.push_back(x);
    for (std::size_t v = 0; v < node_count; ++v) {
        const auto root = sets.find(tx_count + v);
        const auto it = by_root.find(root);
        if (it != by_root.end()) it->second.nodes.push_back(v);
    }
    std::vector<Component> out;
    for (auto& [root, c] : by_root) out.push_back(std::move(c));
    return out;
}

const ObservationTuple& require_first_spy(const ObservationLog& log, std::size_t x) {
    if (x >= log.first_spy.size() || !log.first_spy[x])
        throw std::invalid_argument("tx " + std::to_string(x) + " has no first-spy observation");
    return *log.first_spy[x];
}

/// Observation key: (spy, or kVirtualSpy for a stem exit, sender).
using ObsKey = std::pair<NodeId, NodeId>;

ObsKey observation_key(const ObservationTuple& t) {
    return {t.virtual_exit ? kVirtualSpy : t.spy, t.sender};
}

void fill_leftovers(SourceMapping& mapping, std::vector<bool>& node_used,
                    const std::vector<NodeId>& nodes, Rng& rng) {
    std::vector<NodeId> free_nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (!node_used[i]) free_nodes.push_back(nodes[i]);
    rng.shuffle(free_nodes);
    std::size_t next = 0;
    for (auto& target : mapping.targets) {
        if (target != kNoNode) continue;
        if (next >= free_nodes.size())
            throw std::invalid_argument("more transactions than honest nodes");
        target = free_nodes[next++];
    }
}

/// Sparse likelihood of each observation key given the source, for the stem
/// phase on an explicit adjacency.
using Likelihood = std::map<ObsKey, double>;

Likelihood stem_likelihood(const std::vector<std::vector<NodeId>>& out,
                           const std::vector<bool>& spy, NodeId source, double q,
                           std::size_t limit) {
    Likelihood lik;
    std::map<NodeId, double> current{{source, 1.0}}, next;
    for (std::size_t hop = 1; !current.empty(); ++hop) {
        next.clear();
        for (const auto& [head, mass] : current) {
            const auto& outs = out[head];
            if (outs.empty()) {
                lik[{kVirtualSpy, head}] += mass;
                continue;
            }
            const double share = mass / static_cast<double>(outs.size());
            for (NodeId nb : outs) {
                if (spy[nb]) {
                    lik[{nb, head}] += share;
                } else if (hop >= limit) {
                    lik[{kVirtualSpy, nb}] += share;
                } else {
                    if (q > 0.0) lik[{kVirtualSpy, nb}] += share * q;
                    next[nb] += share * (1.0 - q);
                }
            }
        }
        current.swap(next);
    }
    return lik;
}

std::vector<std::vector<NodeId>> adjacency_of(const NetworkGraph& g) {
    std::vector<std::vector<NodeId>> out(g.size());
    for (NodeId v = 0; v < g.size(); ++v) {
        const auto nb = g.out_neighbors(v);
        out[v].assign(nb.begin(), nb.end());
    }
    return out;
}

double likelihood_at(const Likelihood& lik, const ObsKey& key) {
    const auto it = lik.find(key);
    return it == lik.end() ? 0.0 : it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// Estimators

SourceMapping first_spy_estimator(const AdversaryView& view) {
    const ObservationLog& log = view.log();
    SourceMapping mapping{log.txs, std::vector<NodeId>(log.size()), false};
    for (std::size_t x = 0; x < log.size(); ++x) mapping.targets[x] = require_first_spy(log, x).sender;
    return mapping;
}

SourceMapping random_mapping(const std::vector<TxId>& txs, const std::vector<NodeId>& nodes,
                             std::uint64_t seed) {
    if (nodes.size() < txs.size()) throw std::invalid_argument("more transactions than nodes");
    Rng rng(seed);
    std::vector<NodeId> shuffled = nodes;
    rng.shuffle(shuffled);
    shuffled.resize(txs.size());
    return SourceMapping{txs, std::move(shuffled), true};
}

SourceMapping matching_estimator(const AdversaryView& view, const PosteriorModel& model,
                                 std::uint64_t seed) {
    model.validate();
    if (model.txs() != view.log().txs)
        throw std::invalid_argument("posterior does not cover the logged transactions");
    const std::size_t T = model.tx_count(), N = model.node_count();
    Rng rng(seed);
    SourceMapping mapping{model.txs(), std::vector<NodeId>(T, kNoNode), true};
    std::vector<bool> node_used(N, false);

    const auto components =
        support_components(T, N, [&](std::size_t x, std::size_t v) { return model.at(x, v) > 0.0; });
    for (const Component& c : components) {
        if (c.nodes.empty()) continue;
        const double w0 = model.at(c.txs.front(), c.nodes.front());
        bool uniform = c.txs.size() == c.nodes.size();
        for (std::size_t x : c.txs) {
            if (!uniform) break;
            for (std::size_t v : c.nodes)
                if (model.at(x, v) != w0) {
                    uniform = false;
                    break;
                }
        }
        if (uniform) {
            // Every perfect matching of a complete uniform block is optimal.
            std::vector<std::size_t> order = c.nodes;
            rng.shuffle(order);
            for (std::size_t i = 0; i < c.txs.size(); ++i) {
                mapping.targets[c.txs[i]] = model.nodes()[order[i]];
                node_used[order[i]] = true;
            }
            continue;
        }
        std::vector<double> sub(c.txs.size() * c.nodes.size());
        for (std::size_t i = 0; i < c.txs.size(); ++i)
            for (std::size_t j = 0; j < c.nodes.size(); ++j)
                sub[i * c.nodes.size() + j] = model.at(c.txs[i], c.nodes[j]);
        const auto assigned = max_weight_assignment(sub, c.txs.size(), c.nodes.size());
        for (std::size_t i = 0; i < c.txs.size(); ++i) {
            const std::size_t j = assigned[i];
            if (j == kUnassigned || sub[i * c.nodes.size() + j] <= 0.0) continue;
            mapping.targets[c.txs[i]] = model.nodes()[c.nodes[j]];
            node_used[c.nodes[j]] = true;
        }
    }
    fill_leftovers(mapping, node_used, model.nodes(), rng);
    return mapping;
}

double mapping_objective(const PosteriorModel& model, const SourceMapping& mapping) {
    double total = 0.0;
    for (std::size_t x = 0; x < mapping.size(); ++x) total += model.weight(x, mapping.targets[x]);
    return total;
}

SourceMapping recall_optimal_estimator(const AdversaryView& view, const PosteriorModel& model,
                                       std::uint64_t seed) {
    model.validate();
    const ObservationLog& log = view.log();
    if (model.txs() != log.txs)
        throw std::invalid_argument("posterior does not cover the logged transactions");
    Rng rng(seed);
    SourceMapping mapping{model.txs(), std::vector<NodeId>(model.tx_count()), false};
    std::vector<std::size_t> best;
    for (std::size_t x = 0; x < model.tx_count(); ++x) {
        const auto col = model.column(x);
        const double top = *std::max_element(col.begin(), col.end());
        best.clear();
        for (std::size_t v = 0; v < col.size(); ++v)
            if (col[v] >= top - 1e-12) best.push_back(v);
        std::optional<std::size_t> preferred;
        if (x < log.first_spy.size() && log.first_spy[x]) {
            const auto idx = model.index_of(log.first_spy[x]->sender);
            if (idx && std::find(best.begin(), best.end(), *idx) != best.end()) preferred = idx;
        }
        const std::size_t pick =
            preferred ? *preferred : best[rng.uniform_below(best.size())];
        mapping.targets[x] = model.nodes()[pick];
    }
    return mapping;
}

// ---------------------------------------------------------------------------
// Dandelion posteriors

PosteriorModel dandelion_static_posterior(const AdversaryView& view,
                                          const DandelionParams& params) {
    params.validate();
    const NetworkGraph& g = view.graph();
    const ObservationLog& log = view.log();
    for (NodeId v = 0; v < g.size(); ++v)
        if (!g.is_spy(v) && g.out_degree(v) > 1)
            throw std::invalid_argument("static dandelion posterior needs honest out-degree <= 1");

    PosteriorModel model(g.honest_nodes(), log.txs);
    const auto adjacency = adjacency_of(g);
    std::vector<bool> spy(g.size());
    for (NodeId v = 0; v < g.size(); ++v) spy[v] = g.is_spy(v);
    const std::size_t limit = params.hop_limit(g.size());

    std::vector<Likelihood> lik(model.node_count());
    for (std::size_t i = 0; i < model.node_count(); ++i)
        lik[i] = stem_likelihood(adjacency, spy, model.nodes()[i], params.q, limit);

    std::vector<ObsKey> keys(log.size());
    for (std::size_t x = 0; x < log.size(); ++x) keys[x] = observation_key(require_first_spy(log, x));

    std::map<ObsKey, std::vector<std::size_t>> sources_by_key;
    for (std::size_t i = 0; i < lik.size(); ++i)
        for (const auto& [key, mass] : lik[i])
            if (mass > 0.0) sources_by_key[key].push_back(i);

    DisjointSets sets(log.size() + model.node_count());
    for (std::size_t x = 0; x < log.size(); ++x) {
        const auto it = sources_by_key.find(keys[x]);
        if (it == sources_by_key.end())
            throw std::invalid_argument("observation of tx " + std::to_string(x) +
                                        " is impossible under the known graph");
        for (std::size_t v : it->second) sets.unite(x, log.size() + v);
    }
    std::map<std::size_t, Component> by_root;
    for (std::size_t x = 0; x < log.size(); ++x) by_root[sets.find(x)].txs.push_back(x);
    for (std::size_t v = 0; v < model.node_count(); ++v) {
        const auto it = by_root.find(sets.find(log.size() + v));
        if (it != by_root.end()) it->second.nodes.push_back(v);
    }

    for (const auto& [root, c] : by_root) {
        const std::size_t k = c.txs.size();
        if (c.nodes.size() != k)
            throw std::invalid_argument("observations are inconsistent with the known graph");
        std::vector<double> a(k * k);
        bool uniform = true;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                a[i * k + j] = likelihood_at(lik[c.nodes[j]], keys[c.txs[i]]);
                uniform = uniform && a[i * k + j] == a[0];
            }
        if (uniform) {
            for (std::size_t x : c.txs)
                for (std::size_t v : c.nodes) model.at(x, v) = 1.0 / static_cast<double>(k);
            continue;
        }
        auto marginals = laminar_assignment_marginals(a, k);
        if (!marginals) {
            if (k > kMaxSubsetAssignment)
                throw std::invalid_argument("posterior block of " + std::to_string(k) +
                                            " nodes is too large for exact evaluation");
            marginals = assignment_marginals(a, k);
        }
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) model.at(c.txs[i], c.nodes[j]) = (*marginals)[i * k + j];
    }
    return model;
}

PosteriorModel dandelion_dynamic_line_posterior(const AdversaryView& view) {
    const LocalNeighborhood& local = view.neighborhood();
    const ObservationLog& log = view.log();
    const std::vector<NodeId> honest = local.honest_nodes();
    PosteriorModel model(honest, log.txs);

    std::map<NodeId, NodeId> exit_spy_of;  // head -> spy it forwards to
    std::set<NodeId> tails;
    for (const auto& [s, outs] : local.spy_out) {
        const auto& ins = local.spy_in.at(s);
        if (outs.size() != 1 || ins.size() != 1)
            throw std::invalid_argument("dynamic line posterior needs a single directed cycle");
        if (!local.is_spy(ins[0])) exit_spy_of[ins[0]] = s;
        if (!local.is_spy(outs[0])) tails.insert(outs[0]);
    }

    std::map<NodeId, std::vector<std::size_t>> sent_by;
    for (std::size_t x = 0; x < log.size(); ++x) {
        const ObservationTuple& t = require_first_spy(log, x);
        if (t.virtual_exit)
            throw std::invalid_argument("dynamic line posterior assumes q = 0 (no stem exits)");
        if (!exit_spy_of.contains(t.sender))
            throw std::invalid_argument("sender " + std::to_string(t.sender) +
                                        " is not adjacent to the receiving spy");
        sent_by[t.sender].push_back(x);
    }

    std::vector<NodeId> big_heads;
    for (const auto& [h, s] : exit_spy_of) {
        const auto it = sent_by.find(h);
        const std::size_t w = it == sent_by.end() ? 0 : it->second.size();
        if (w == 0) throw std::invalid_argument("head " + std::to_string(h) + " sent nothing");
        if (w == 1 && !tails.contains(h))
            throw std::invalid_argument("single-message head is not a tail");
        if (w >= 2) big_heads.push_back(h);
    }
    const std::size_t m = big_heads.size();

    std::set<NodeId> big_tails;
    for (NodeId t : tails)
        if (!(exit_spy_of.contains(t) && sent_by.at(t).size() == 1)) big_tails.insert(t);
    if (big_tails.size() != m)
        throw std::invalid_argument("head and tail counts disagree on the line");

    // The tail that follows a head's exit, skipping single-node wards.
    auto next_tail = [&](NodeId h) {
        NodeId x = exit_spy_of.at(h);
        for (std::size_t steps = 0; steps <= local.roster_size; ++steps) {
            x = local.spy_out.at(x)[0];
            if (local.is_spy(x)) continue;
            if (big_tails.contains(x)) return x;
            x = exit_spy_of.at(x);
        }
        throw std::invalid_argument("spy successor chain does not close");
    };

    std::vector<std::size_t> interior;
    std::size_t interior_expected = 0;
    for (std::size_t i = 0; i < honest.size(); ++i)
        if (!exit_spy_of.contains(honest[i]) && !tails.contains(honest[i])) interior.push_back(i);
    for (NodeId h : big_heads) interior_expected += sent_by.at(h).size() - 2;
    if (interior.size() != interior_expected)
        throw std::invalid_argument("interior node count disagrees with observed ward sizes");

    for (const auto& [h, txs] : sent_by) {
        const double w = static_cast<double>(txs.size());
        const std::size_t head_idx = *model.index_of(h);
        for (std::size_t x : txs) {
            if (txs.size() == 1) {
                model.at(x, head_idx) = 1.0;
                continue;
            }
            model.at(x, head_idx) = 1.0 / w;
            const NodeId own_next = next_tail(h);
            if (m == 1) {
                model.at(x, *model.index_of(own_next)) = 1.0 / w;
            } else {
                for (NodeId t : big_tails)
                    if (t != own_next)
                        model.at(x, *model.index_of(t)) = 1.0 / (w * static_cast<double>(m - 1));
            }
            if (!interior.empty()) {
                const double share = (w - 2.0) / (w * static_cast<double>(interior.size()));
                for (std::size_t i : interior) model.at(x, i) = share;
            }
        }
    }
    return model;
}

// ---------------------------------------------------------------------------
// Flooding estimators

SourceMapping flooding_static_estimator(const AdversaryView& view, std::uint64_t seed) {
    const ObservationLog& log = view.log();
    if (log.protocol != ProtocolTag::Flooding)
        throw std::invalid_argument("flooding estimator needs a flooding log");
    const NetworkGraph& g = view.graph();
    const auto wards = compute_wards(g, WardSemantics::FloodingReachability);

    std::vector<std::set<NodeId>> first_senders(log.size());
    for (const ObservationTuple& t : log.full) {
        const ObservationTuple& first = require_first_spy(log, t.tx);
        if (t.time == first.time) first_senders[t.tx].insert(t.sender);
    }
    std::map<NodeId, std::vector<std::size_t>> uniquely_delivered;
    for (std::size_t x = 0; x < log.size(); ++x) {
        require_first_spy(log, x);
        if (first_senders[x].size() == 1) uniquely_delivered[*first_senders[x].begin()].push_back(x);
    }

    Rng rng(seed);
    const std::vector<NodeId> honest = g.honest_nodes();
    SourceMapping mapping{log.txs, std::vector<NodeId>(log.size(), kNoNode), true};
    std::vector<bool> node_used(honest.size(), false);
    auto honest_index = [&](NodeId v) {
        return static_cast<std::size_t>(std::lower_bound(honest.begin(), honest.end(), v) -
                                        honest.begin());
    };
    for (const Ward& ward : wards) {
        const auto it = uniquely_delivered.find(ward.head);
        if (it == uniquely_delivered.end()) continue;
        std::vector<NodeId> members = ward.members;
        rng.shuffle(members);
        std::vector<std::size_t> txs = it->second;
        rng.shuffle(txs);
        for (std::size_t i = 0; i < txs.size() && i < members.size(); ++i) {
            mapping.targets[txs[i]] = members[i];
            node_used[honest_index(members[i])] = true;
        }
    }
    fill_leftovers(mapping, node_used, honest, rng);
    return mapping;
}

std::size_t flooding_round_offset(std::size_t n) {
    const auto quarter = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(n)) / 4.0));
    return quarter >= 1 ? quarter - 1 : 0;
}

SourceMapping flooding_dynamic_estimator(const AdversaryView& view, double p, std::uint64_t seed) {
    const ObservationLog& log = view.log();
    if (log.protocol != ProtocolTag::Flooding || log.round_spy_counts.size() != log.size())
        throw std::invalid_argument("flooding dynamic estimator needs per-round spy counts");
    const std::size_t n = view.node_count();
    const std::size_t offset = flooding_round_offset(n);
    const double threshold = 2.0 * p * std::pow(static_cast<double>(n), 0.25);

    const std::vector<NodeId> honest = view.honest_nodes();
    SourceMapping mapping{log.txs, std::vector<NodeId>(log.size(), kNoNode), false};
    std::vector<bool> node_used(honest.size(), false);
    for (std::size_t x = 0; x < log.size(); ++x) {
        const ObservationTuple& first = require_first_spy(log, x);
        const auto round = static_cast<std::size_t>(first.time) + offset;
        if (static_cast<double>(log.spies_in_round(x, round)) < threshold) {
            mapping.targets[x] = first.sender;
            const auto it = std::lower_bound(honest.begin(), honest.end(), first.sender);
            node_used[static_cast<std::size_t>(it - honest.begin())] = true;
        }
    }
    Rng rng(seed);
    fill_leftovers(mapping, node_used, honest, rng);
    return mapping;
}

// ---------------------------------------------------------------------------
// Enumeration oracle

namespace {

/// Adds, for every assignment of txs to sources, the product of likelihoods
/// into numer[x][v] for each used pair; returns the total over assignments.
double accumulate_assignments(const std::vector<double>& a, std::size_t k,
                              std::vector<double>& numer) {
    std::vector<std::size_t> chosen(k);
    std::vector<bool> taken(k, false);
    double total = 0.0;
    auto recurse = [&](auto&& self, std::size_t x, double prod) -> void {
        if (x == k) {
            total += prod;
            for (std::size_t i = 0; i < k; ++i) numer[i * k + chosen[i]] += prod;
            return;
        }
        for (std::size_t v = 0; v < k; ++v) {
            if (taken[v] || a[x * k + v] == 0.0) continue;
            taken[v] = true;
            chosen[x] = v;
            self(self, x + 1, prod * a[x * k + v]);
            taken[v] = false;
        }
    };
    recurse(recurse, 0, 1.0);
    return total;
}

}  // namespace

PosteriorModel brute_force_posterior(const NetworkGraph& g, const ObservationLog& log,
                                     const DandelionParams& params, OracleKnowledge knowledge) {
    params.validate();
    const std::vector<NodeId> honest = g.honest_nodes();
    const std::size_t k = honest.size();
    if (k > 8) throw std::invalid_argument("enumeration oracle supports at most 8 honest nodes");
    if (log.size() != k) throw std::invalid_argument("log must hold one tx per honest node");
    const std::size_t n = g.size();
    const std::size_t limit = params.hop_limit(n);

    std::vector<ObsKey> keys(k);
    for (std::size_t x = 0; x < k; ++x) keys[x] = observation_key(require_first_spy(log, x));
    std::vector<bool> spy(n);
    for (NodeId v = 0; v < n; ++v) spy[v] = g.is_spy(v);

    std::vector<double> numer(k * k, 0.0);
    double total = 0.0;
    auto add_graph = [&](const std::vector<std::vector<NodeId>>& adjacency) {
        std::vector<double> a(k * k);
        for (std::size_t v = 0; v < k; ++v) {
            const Likelihood lik = stem_likelihood(adjacency, spy, honest[v], params.q, limit);
            for (std::size_t x = 0; x < k; ++x) a[x * k + v] = likelihood_at(lik, keys[x]);
        }
        total += accumulate_assignments(a, k, numer);
    };

    if (knowledge == OracleKnowledge::FullGraph) {
        add_graph(adjacency_of(g));
    } else {
        if (!is_single_cycle(g) || n > 8)
            throw std::invalid_argument("local-knowledge oracle needs a single cycle of <= 8 nodes");
        // Every Hamiltonian cycle agreeing with the spies' in- and out-links.
        std::vector<NodeId> order{0};
        std::vector<bool> placed(n, false);
        placed[0] = true;
        auto consistent = [&](NodeId from, NodeId to) {
            if (spy[from] && g.out_neighbors(from)[0] != to) return false;
            if (spy[to] && g.in_neighbors(to)[0] != from) return false;
            return true;
        };
        auto extend = [&](auto&& self) -> void {
            if (order.size() == n) {
                if (!consistent(order.back(), order.front())) return;
                std::vector<std::vector<NodeId>> adjacency(n);
                for (std::size_t i = 0; i < n; ++i) adjacency[order[i]] = {order[(i + 1) % n]};
                add_graph(adjacency);
                return;
            }
            for (NodeId v = 1; v < n; ++v) {
                if (placed[v] || !consistent(order.back(), v)) continue;
                placed[v] = true;
                order.push_back(v);
                self(self);
                order.pop_back();
                placed[v] = false;
            }
        };
        extend(extend);
    }

    if (!(total > 0.0)) throw std::invalid_argument("observed log has zero probability");
    PosteriorModel model(honest, log.txs);
    for (std::size_t x = 0; x < k; ++x)
        for (std::size_t v = 0; v < k; ++v) model.at(x, v) = numer[x * k + v] / total;
    return model;
}

double brute_force_max_matching_objective(const PosteriorModel& model) {
    const std::size_t k = model.node_count();
    if (k > 8 || model.tx_count() != k)
        throw std::invalid_argument("matching enumeration needs a square model of <= 8 nodes");
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        double total = 0.0;
        for (std::size_t x = 0; x < k; ++x) total += model.at(x, perm[x]);
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace anonsim
