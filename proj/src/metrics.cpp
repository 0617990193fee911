#include "anonsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace anonsim {

TrialMetrics evaluate_trial(const SourceMapping& mapping, const GroundTruth& truth) {
    if (mapping.targets.size() != mapping.txs.size())
        throw std::invalid_argument("mapping has mismatched tx and target lists");
    TrialMetrics out;
    out.nodes = truth.sources;
    std::sort(out.nodes.begin(), out.nodes.end());
    const std::size_t k = out.nodes.size();
    auto index_of = [&](NodeId v) -> std::size_t {
        const auto it = std::lower_bound(out.nodes.begin(), out.nodes.end(), v);
        if (it == out.nodes.end() || *it != v)
            throw std::invalid_argument("mapping targets node " + std::to_string(v) +
                                        ", which is not an honest server");
        return static_cast<std::size_t>(it - out.nodes.begin());
    };

    std::vector<std::pair<TxId, NodeId>> source_of(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) source_of[i] = {truth.txs[i], truth.sources[i]};
    std::sort(source_of.begin(), source_of.end());

    std::vector<std::size_t> blamed(k, 0);
    std::vector<bool> correct(k, false);
    std::size_t covered = 0;
    for (std::size_t i = 0; i < mapping.size(); ++i) {
        const std::size_t target = index_of(mapping.targets[i]);
        ++blamed[target];
        const auto it = std::lower_bound(
            source_of.begin(), source_of.end(), mapping.txs[i],
            [](const auto& entry, const TxId& tx) { return entry.first < tx; });
        if (it == source_of.end() || it->first != mapping.txs[i])
            throw std::invalid_argument("mapping contains an unknown transaction");
        ++covered;
        if (it->second == mapping.targets[i]) correct[target] = true;
    }
    if (covered != truth.size()) throw std::invalid_argument("mapping does not cover every tx");

    out.per_node_precision.assign(k, 0.0);
    out.per_node_recall.assign(k, 0.0);
    double dsum = 0.0, rsum = 0.0;
    for (std::size_t v = 0; v < k; ++v) {
        if (correct[v]) {
            out.per_node_recall[v] = 1.0;
            out.per_node_precision[v] = 1.0 / static_cast<double>(blamed[v]);
        }
        dsum += out.per_node_precision[v];
        rsum += out.per_node_recall[v];
    }
    if (k > 0) {
        out.precision = dsum / static_cast<double>(k);
        out.recall = rsum / static_cast<double>(k);
    }
    return out;
}

RegionCheck assert_region_bounds(double precision, double recall, double slack) {
    RegionCheck check;
    std::ostringstream msg;
    if (precision > recall + slack) {
        msg << "precision " << precision << " exceeds recall " << recall;
        check.ok = false;
    } else if (recall > std::sqrt(precision) + slack) {
        msg << "recall " << recall << " exceeds sqrt(precision) " << std::sqrt(precision);
        check.ok = false;
    }
    check.detail = msg.str();
    return check;
}

RegionCheck assert_region_bounds(const TrialMetrics& t, double slack) {
    return assert_region_bounds(t.precision, t.recall, slack);
}

MeanStderr mean_stderr(const std::vector<double>& values) {
    if (values.size() < 2) throw std::invalid_argument("need at least two samples");
    const double count = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= count;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (count - 1.0)) / std::sqrt(count)};
}

DetectionPoint aggregate(const std::vector<TrialMetrics>& trials, std::string protocol,
                         std::string topology, std::size_t n, double p, double q) {
    std::vector<double> d, r;
    for (const auto& t : trials) {
        d.push_back(t.precision);
        r.push_back(t.recall);
    }
    const MeanStderr dp = mean_stderr(d), rp = mean_stderr(r);
    return DetectionPoint{std::move(protocol), std::move(topology), n, p, q, trials.size(),
                          rp.mean, rp.se, dp.mean, dp.se};
}

}  // namespace anonsim
