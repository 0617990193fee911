#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "anonsim/graph.hpp"
#include "anonsim/spreading.hpp"

namespace anonsim {

/// Estimator output: targets[i] is the honest node blamed for txs[i].
struct SourceMapping {
    std::vector<TxId> txs;
    std::vector<NodeId> targets;
    bool is_matching = false;

    std::size_t size() const { return txs.size(); }
};

/// What an adversary that only sees its own links knows: which nodes exist,
/// which are its own, and the neighbors of each spy.
struct LocalNeighborhood {
    std::size_t roster_size = 0;
    std::vector<bool> spy_flags;
    std::map<NodeId, std::vector<NodeId>> spy_out;
    std::map<NodeId, std::vector<NodeId>> spy_in;

    static LocalNeighborhood observe(const NetworkGraph& g);
    bool is_spy(NodeId v) const { return spy_flags[v]; }
    std::vector<NodeId> honest_nodes() const;
};

class AdversaryView {
public:
    static AdversaryView full(const ObservationLog& log, const NetworkGraph& g) {
        return AdversaryView(log, &g, std::nullopt);
    }
    static AdversaryView local(const ObservationLog& log, const NetworkGraph& g) {
        return AdversaryView(log, nullptr, LocalNeighborhood::observe(g));
    }
    static AdversaryView local(const ObservationLog& log, LocalNeighborhood neighborhood) {
        return AdversaryView(log, nullptr, std::move(neighborhood));
    }

    const ObservationLog& log() const { return *log_; }
    bool has_full_graph() const { return graph_ != nullptr; }
    /// Throws unless the view carries the full graph.
    const NetworkGraph& graph() const;
    /// Throws unless the view carries only a local neighborhood.
    const LocalNeighborhood& neighborhood() const;

    std::size_t node_count() const;
    bool is_spy(NodeId v) const;
    std::vector<NodeId> honest_nodes() const;

private:
    AdversaryView(const ObservationLog& log, const NetworkGraph* g,
                  std::optional<LocalNeighborhood> local)
        : log_(&log), graph_(g), local_(std::move(local)) {}

    const ObservationLog* log_;
    const NetworkGraph* graph_;
    std::optional<LocalNeighborhood> local_;
};

/// Posterior P(X_v = x | observations) over honest nodes, stored tx-major.
class PosteriorModel {
public:
    PosteriorModel() = default;
    PosteriorModel(std::vector<NodeId> nodes, std::vector<TxId> txs);

    const std::vector<NodeId>& nodes() const { return nodes_; }
    const std::vector<TxId>& txs() const { return txs_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t tx_count() const { return txs_.size(); }

    double& at(std::size_t tx, std::size_t node_index) {
        return weights_[tx * nodes_.size() + node_index];
    }
    double at(std::size_t tx, std::size_t node_index) const {
        return weights_[tx * nodes_.size() + node_index];
    }
    std::span<const double> column(std::size_t tx) const {
        return {weights_.data() + tx * nodes_.size(), nodes_.size()};
    }
    /// Weight for an explicit node id (0 for unknown nodes).
    double weight(std::size_t tx, NodeId v) const;
    std::optional<std::size_t> index_of(NodeId v) const;

    /// Throws std::invalid_argument unless every column is nonnegative and
    /// sums to one within tol.
    void validate(double tol = 1e-9) const;

    /// Largest absolute entrywise difference; models must share nodes and txs.
    double max_abs_difference(const PosteriorModel& other) const;

private:
    std::vector<NodeId> nodes_;
    std::vector<TxId> txs_;
    std::vector<double> weights_;
};

SourceMapping first_spy_estimator(const AdversaryView& view);

/// Exact maximum-weight matching of txs to honest nodes on posterior
/// probabilities; zero-probability pairs are never used and leftovers are
/// matched uniformly at random.
SourceMapping matching_estimator(const AdversaryView& view, const PosteriorModel& model,
                                 std::uint64_t seed);

/// Sum of model weights over the pairs of a mapping.
double mapping_objective(const PosteriorModel& model, const SourceMapping& mapping);

/// Per-tx argmax. Ties prefer the first-spy sender, otherwise break uniformly.
SourceMapping recall_optimal_estimator(const AdversaryView& view, const PosteriorModel& model,
                                       std::uint64_t seed);

/// Posterior for a dandelion log when the adversary knows the whole
/// anonymity graph (honest out-degree <= 1 required).
PosteriorModel dandelion_static_posterior(const AdversaryView& view,
                                          const DandelionParams& params = {});

/// Posterior for a q = 0 dandelion log on a single directed cycle when the
/// adversary knows only its own neighbors.
PosteriorModel dandelion_dynamic_line_posterior(const AdversaryView& view);

/// Ward-based estimator for flooding logs on a known graph.
SourceMapping flooding_static_estimator(const AdversaryView& view, std::uint64_t seed);

/// Threshold estimator for flooding logs on an unknown 4-regular graph.
SourceMapping flooding_dynamic_estimator(const AdversaryView& view, double p, std::uint64_t seed);

/// Round offset after the first spy receipt at which spies are counted.
std::size_t flooding_round_offset(std::size_t n);

/// Uniformly random matching; the baseline for comparisons.
SourceMapping random_mapping(const std::vector<TxId>& txs, const std::vector<NodeId>& nodes,
                             std::uint64_t seed);

enum class OracleKnowledge { FullGraph, LocalNeighborhood };

/// Exact posterior by enumeration of every source assignment (and, for local
/// knowledge, every single-cycle graph consistent with the spies' links).
/// Limited to at most 8 honest nodes.
PosteriorModel brute_force_posterior(const NetworkGraph& g, const ObservationLog& log,
                                     const DandelionParams& params,
                                     OracleKnowledge knowledge = OracleKnowledge::FullGraph);

/// Largest mapping objective over all perfect matchings, by enumeration
/// (at most 8 honest nodes).
double brute_force_max_matching_objective(const PosteriorModel& model);

}  // namespace anonsim
