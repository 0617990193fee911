#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "anonsim/graph.hpp"
#include "anonsim/metrics.hpp"

namespace anonsim {

enum class Protocol { Dandelion, Flooding, Diffusion, DiffusionByProxy };

enum class Estimator {
    FirstSpy,
    Matching,        // max-weight matching on the dandelion posterior
    RecallOptimal,   // per-tx argmax of the dandelion posterior
    FloodingWard,    // ward matching on a known graph
    FloodingThreshold,
    Random,
};

/// Static: the adversary knows the whole graph. Dynamic: only its own links.
enum class Knowledge { Static, Dynamic };

std::string to_string(Protocol p);
std::string to_string(Estimator e);
std::string to_string(Knowledge k);
Protocol parse_protocol(const std::string& s);
Estimator parse_estimator(const std::string& s);
Knowledge parse_knowledge(const std::string& s);

struct Scenario {
    std::string label;
    TopologySpec topology;
    Protocol protocol = Protocol::Dandelion;
    Estimator estimator = Estimator::FirstSpy;
    Knowledge knowledge = Knowledge::Static;
    double p = 0.2;
    double q = 0.0;

    /// Throws std::invalid_argument for combinations no estimator supports.
    void validate() const;
};

struct TrialResult {
    std::uint64_t seed = 0;
    TrialMetrics metrics;
};

/// One independent realization: fresh graph, spies, transactions and
/// protocol randomness, all derived from trial_seed.
TrialResult run_trial(const Scenario& scenario, std::uint64_t trial_seed);

/// Seed of trial t at point index `point` of an experiment.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t point, std::size_t trial);

/// Reference implementation: trials one after another.
std::vector<TrialResult> run_trials_serial(const Scenario& scenario, std::size_t trials,
                                           std::uint64_t base_seed, std::size_t point = 0);

/// OpenMP version; results are identical to the serial reference for any
/// thread count.
std::vector<TrialResult> run_trials_parallel(const Scenario& scenario, std::size_t trials,
                                             std::uint64_t base_seed, std::size_t point = 0);

std::vector<TrialMetrics> metrics_of(const std::vector<TrialResult>& results);

}  // namespace anonsim
