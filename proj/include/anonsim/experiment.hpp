#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "anonsim/trials.hpp"

namespace anonsim {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { Region, Sweep, DegreeDist, Leakage, OracleCheck };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a trial breaks a metric invariant; carries the trial seed.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(const std::string& what, std::uint64_t seed)
        : std::runtime_error(what), seed_(seed) {}
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

struct ScenarioConfig {
    std::string label;
    std::string topology;  // tag accepted by parse_topology
    std::size_t n = 0;     // 0: use the experiment's n
    Protocol protocol = Protocol::Dandelion;
    Estimator estimator = Estimator::FirstSpy;
    Knowledge knowledge = Knowledge::Static;
    std::optional<double> q;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Region;
    std::size_t n = 1000;
    std::vector<double> p{0.2};
    double q = 0.0;
    std::size_t trials = 100;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "results";
    std::vector<ScenarioConfig> scenarios;
    std::size_t bounds_degree = 4;
    // degree-dist
    std::vector<std::size_t> k_values{1, 2, 3, 4};
    // leakage
    std::size_t servers = 5500;
    double tx_rate = 3.0;
    double leak_budget = 0.4;
    // oracle-check
    std::size_t instances = 50;
    std::size_t random_mappings = 1000;

    /// Throws ConfigError.
    void validate() const;
    nlohmann::json to_json() const;
};

/// Throws ConfigError for unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

Scenario resolve_scenario(const ScenarioConfig& sc, const ExperimentConfig& cfg, double p);

struct RunSummary {
    std::vector<std::filesystem::path> files;
    std::uint64_t seed = 0;
    std::vector<DetectionPoint> points;
};

/// Runs the experiment and writes its CSV files and manifest.json into
/// cfg.out. Files are written only after all trials succeed.
RunSummary run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

struct DegreeSummary {
    std::size_t k = 0;
    std::size_t seeds = 0;
    double mean_max_in_degree = 0.0;
    double max_in_degree_se = 0.0;
    double leaf_fraction = 0.0;
    double leaf_fraction_se = 0.0;
    double mean_total_degree = 0.0;
    std::vector<double> in_degree_fraction;  // index = in-degree
};

DegreeSummary k_approx_degree_summary(std::size_t n, std::size_t k, std::size_t seeds,
                                      std::uint64_t base_seed);

struct LeakageRow {
    std::size_t servers = 0;
    double p = 0.0;
    double tx_rate = 0.0;
    double leak_budget = 0.0;
    std::size_t ward_size = 0;
    double interval_s = 0.0;
    double q = 0.0;
    std::size_t simulated_txs = 0;
    double revealed_interior_fraction = 0.0;
};

/// Refresh interval plus the interior fraction revealed by stem exits when
/// interval * tx_rate transactions cross a spliced line.
LeakageRow leakage_row(std::size_t servers, double p, double tx_rate, double leak_budget, double q,
                       std::size_t repetitions, std::uint64_t seed);

struct OracleReport {
    std::size_t instance = 0;
    std::string topology;
    double q = 0.0;
    std::size_t honest = 0;
    double static_max_diff = 0.0;
    std::optional<double> dynamic_max_diff;  // lines with q = 0 only
    double matching_objective = 0.0;
    double oracle_objective = 0.0;
    double argmax_expected_recall = 0.0;
    double best_random_expected_recall = 0.0;

    bool ok(double tol = 1e-9) const;
};

/// Instance i alternates between a 7-node spliced line and a 7-node tree
/// (root degree 3), and between q = 0 and q = 0.3.
OracleReport oracle_instance(std::size_t index, std::uint64_t seed, std::size_t random_mappings);

}  // namespace anonsim
