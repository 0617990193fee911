#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "anonsim/adversary.hpp"
#include "anonsim/spreading.hpp"

namespace anonsim {

struct TrialMetrics {
    std::vector<NodeId> nodes;  // honest nodes, sorted
    std::vector<double> per_node_precision;
    std::vector<double> per_node_recall;
    double precision = 0.0;
    double recall = 0.0;
};

/// Macro-averaged precision and recall of a mapping against the truth. A node
/// blamed for nothing has precision 0.
TrialMetrics evaluate_trial(const SourceMapping& mapping, const GroundTruth& truth);

struct RegionCheck {
    bool ok = true;
    std::string detail;
    explicit operator bool() const { return ok; }
};

/// Checks precision <= recall <= sqrt(precision) with a small slack.
RegionCheck assert_region_bounds(double precision, double recall, double slack = 1e-12);
RegionCheck assert_region_bounds(const TrialMetrics& t, double slack = 1e-12);

struct DetectionPoint {
    std::string protocol;
    std::string topology;
    std::size_t n = 0;
    double p = 0.0;
    double q = 0.0;
    std::size_t trials = 0;
    double recall = 0.0;
    double recall_se = 0.0;
    double precision = 0.0;
    double precision_se = 0.0;
};

struct MeanStderr {
    double mean = 0.0;
    double se = 0.0;
};

/// Sample mean and standard error (sample stddev / sqrt(count)); needs >= 2 values.
MeanStderr mean_stderr(const std::vector<double>& values);

DetectionPoint aggregate(const std::vector<TrialMetrics>& trials, std::string protocol,
                         std::string topology, std::size_t n, double p, double q = 0.0);

}  // namespace anonsim
