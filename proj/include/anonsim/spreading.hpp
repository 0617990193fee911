#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "anonsim/graph.hpp"

namespace anonsim {

/// Opaque transaction identifier; carries no information about its source.
struct TxId {
    std::uint64_t nonce = 0;
    friend auto operator<=>(const TxId&, const TxId&) = default;
};

/// One transaction per honest node. txs[i] originates at sources[i]; the
/// order of entries is random so position leaks nothing.
struct GroundTruth {
    std::vector<TxId> txs;
    std::vector<NodeId> sources;

    std::size_t size() const { return txs.size(); }
};

GroundTruth make_ground_truth(const NetworkGraph& g, std::uint64_t seed);

enum class ProtocolTag { Flooding, Diffusion, DiffusionByProxy, Dandelion };

std::string protocol_name(ProtocolTag tag);

/// Stand-in spy id for a dandelion stem that ended at an honest node.
inline constexpr NodeId kVirtualSpy = kNoNode - 1;

struct ObservationTuple {
    std::uint32_t tx = 0;  // index into ObservationLog::txs
    NodeId spy = kNoNode;
    NodeId sender = kNoNode;
    double time = 0.0;  // round or hop count for discrete protocols
    bool virtual_exit = false;

    friend bool operator==(const ObservationTuple&, const ObservationTuple&) = default;
};

struct ObservationLog {
    ProtocolTag protocol = ProtocolTag::Dandelion;
    std::vector<TxId> txs;
    std::vector<ObservationTuple> full;
    std::vector<std::optional<ObservationTuple>> first_spy;  // aligned with txs
    /// Flooding only: round_spy_counts[tx][r] spies first receiving tx in round r.
    std::vector<std::vector<std::uint32_t>> round_spy_counts;

    std::size_t size() const { return txs.size(); }
    /// Number of spies first receiving tx in round r (0 past the recorded horizon).
    std::uint32_t spies_in_round(std::size_t tx, std::size_t round) const;

    friend bool operator==(const ObservationLog&, const ObservationLog&) = default;
};

struct FloodingOptions {
    std::optional<Propagation> mode;  // defaults to the topology's propagation
    /// Stop each broadcast this many rounds after its first spy receipt.
    std::size_t rounds_after_first_spy = std::numeric_limits<std::size_t>::max();
};

/// Synchronous rounds with unit delay; every node (spies included) relays a
/// message to all forward neighbors one round after first receipt.
ObservationLog run_flooding(const NetworkGraph& g, const GroundTruth& truth,
                            const FloodingOptions& options = {});

struct DiffusionOptions {
    std::optional<Propagation> mode;
    bool first_spy_only = false;
};

/// Delay of tx on the directed link from -> to.
using EdgeDelay = std::function<double(std::size_t tx, NodeId from, NodeId to)>;

/// Exponential(1) delays keyed by (seed, tx, from, to).
EdgeDelay exponential_delays(std::uint64_t seed);

/// Continuous-time broadcast. Logged times are relative to each message's
/// first spy receipt.
ObservationLog run_diffusion(const NetworkGraph& g, const GroundTruth& truth, std::uint64_t seed,
                             const DiffusionOptions& options = {});
ObservationLog run_diffusion(const NetworkGraph& g, const GroundTruth& truth,
                             const EdgeDelay& delay, const DiffusionOptions& options = {});

struct ProxyTrace {
    std::size_t hops = 0;
    std::size_t spy_hits = 0;
};

/// Each message hops to uniform nodes of the roster (edges are ignored) until
/// it lands on a spy.
ObservationLog run_diffusion_by_proxy(const NetworkGraph& roster, const GroundTruth& truth,
                                      std::uint64_t seed, ProxyTrace* trace = nullptr);

struct DandelionParams {
    double q = 0.0;
    std::size_t max_hops = 0;  // 0 means n

    std::size_t hop_limit(std::size_t n) const { return max_hops == 0 ? n : max_hops; }
    void validate() const;
};

struct DandelionTrace {
    /// Per tx: whether the source's first forward landed on a spy.
    std::vector<bool> first_hop_spy;
};

/// Stem phase of dandelion spreading over anon_graph. A stem that stops at an
/// honest node is logged against kVirtualSpy with that node as sender. An
/// honest sink (tree root) ends every stem that reaches it.
ObservationLog run_dandelion(const NetworkGraph& anon_graph, const DandelionParams& params,
                             const GroundTruth& truth, std::uint64_t seed,
                             DandelionTrace* trace = nullptr);

}  // namespace anonsim
