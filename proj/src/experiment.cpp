#include "anonsim/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "anonsim/adversary.hpp"
#include "anonsim/io.hpp"
#include "anonsim/rng.hpp"
#include "anonsim/spreading.hpp"
#include "anonsim/theory.hpp"

namespace anonsim {

using nlohmann::json;

namespace {

constexpr std::pair<const char*, ExperimentKind> kKinds[] = {
    {"region", ExperimentKind::Region},
    {"sweep", ExperimentKind::Sweep},
    {"degree-dist", ExperimentKind::DegreeDist},
    {"leakage", ExperimentKind::Leakage},
    {"oracle-check", ExperimentKind::OracleCheck},
};

template <typename T>
T get_as(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : doc.items())
        if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

std::string to_string(ExperimentKind k) {
    for (const auto& [name, value] : kKinds)
        if (value == k) return name;
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
    for (const auto& [name, value] : kKinds)
        if (s == name) return value;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Config

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc,
                   {"kind", "n", "p", "q", "trials", "seed", "out", "scenarios", "bounds_degree",
                    "k_values", "servers", "tx_rate", "leak_budget", "instances",
                    "random_mappings"},
                   "config");
    ExperimentConfig cfg;
    if (!doc.contains("kind")) throw ConfigError("config needs a 'kind'");
    cfg.kind = parse_experiment_kind(get_as<std::string>(doc, "kind"));
    if (doc.contains("n")) cfg.n = get_as<std::size_t>(doc, "n");
    if (doc.contains("p")) {
        if (doc["p"].is_number())
            cfg.p = {get_as<double>(doc, "p")};
        else
            cfg.p = get_as<std::vector<double>>(doc, "p");
    }
    if (doc.contains("q")) cfg.q = get_as<double>(doc, "q");
    if (doc.contains("trials")) cfg.trials = get_as<std::size_t>(doc, "trials");
    if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("out")) cfg.out = get_as<std::string>(doc, "out");
    if (doc.contains("bounds_degree")) cfg.bounds_degree = get_as<std::size_t>(doc, "bounds_degree");
    if (doc.contains("k_values")) cfg.k_values = get_as<std::vector<std::size_t>>(doc, "k_values");
    if (doc.contains("servers")) cfg.servers = get_as<std::size_t>(doc, "servers");
    if (doc.contains("tx_rate")) cfg.tx_rate = get_as<double>(doc, "tx_rate");
    if (doc.contains("leak_budget")) cfg.leak_budget = get_as<double>(doc, "leak_budget");
    if (doc.contains("instances")) cfg.instances = get_as<std::size_t>(doc, "instances");
    if (doc.contains("random_mappings"))
        cfg.random_mappings = get_as<std::size_t>(doc, "random_mappings");
    if (doc.contains("scenarios")) {
        if (!doc["scenarios"].is_array()) throw ConfigError("'scenarios' must be an array");
        for (const json& s : doc["scenarios"]) {
            if (!s.is_object()) throw ConfigError("each scenario must be an object");
            reject_unknown(s, {"label", "topology", "n", "protocol", "estimator", "knowledge", "q"},
                           "scenario");
            ScenarioConfig sc;
            sc.topology = get_as<std::string>(s, "topology");
            sc.label = s.contains("label") ? get_as<std::string>(s, "label") : sc.topology;
            if (s.contains("n")) sc.n = get_as<std::size_t>(s, "n");
            try {
                sc.protocol = parse_protocol(get_as<std::string>(s, "protocol"));
                if (s.contains("estimator"))
                    sc.estimator = parse_estimator(get_as<std::string>(s, "estimator"));
                if (s.contains("knowledge"))
                    sc.knowledge = parse_knowledge(get_as<std::string>(s, "knowledge"));
            } catch (const ConfigError&) {
                throw;
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            if (s.contains("q")) sc.q = get_as<double>(s, "q");
            cfg.scenarios.push_back(std::move(sc));
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

Scenario resolve_scenario(const ScenarioConfig& sc, const ExperimentConfig& cfg, double p) {
    const std::size_t n = sc.n ? sc.n : cfg.n;
    Scenario s;
    s.label = sc.label;
    s.topology = parse_topology(sc.topology, n);
    s.protocol = sc.protocol;
    s.estimator = sc.estimator;
    s.knowledge = sc.knowledge;
    s.p = p;
    s.q = sc.q.value_or(cfg.q);
    return s;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (n < 3) throw ConfigError("n must be at least 3");
    if (p.empty()) throw ConfigError("p list is empty");
    for (double v : p)
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("p values must lie in (0,1)");
    if (!(q >= 0.0 && q < 1.0)) throw ConfigError("q must lie in [0,1)");
    switch (kind) {
        case ExperimentKind::Region:
        case ExperimentKind::Sweep:
            if (scenarios.empty()) throw ConfigError("region and sweep need scenarios");
            if (trials < 2) throw ConfigError("aggregation needs at least 2 trials");
            for (const auto& sc : scenarios)
                for (double v : p) {
                    try {
                        resolve_scenario(sc, *this, v).validate();
                    } catch (const std::invalid_argument& e) {
                        throw ConfigError("scenario '" + sc.label + "': " + e.what());
                    }
                }
            break;
        case ExperimentKind::DegreeDist:
            if (trials < 2) throw ConfigError("degree-dist needs at least 2 seeds");
            for (std::size_t k : k_values)
                if (k < 1 || k >= n) throw ConfigError("k values must lie in [1, n-1]");
            break;
        case ExperimentKind::Leakage:
            if (!(tx_rate > 0.0)) throw ConfigError("tx_rate must be positive");
            if (!(leak_budget >= 0.0 && leak_budget <= 1.0))
                throw ConfigError("leak_budget must lie in [0,1]");
            if (servers < 3) throw ConfigError("servers must be at least 3");
            for (double v : p)
                if (!(v < 0.5) || typical_ward_size(v) <= 2)
                    throw ConfigError("leakage needs round(1/p) > 2");
            break;
        case ExperimentKind::OracleCheck:
            if (instances < 1) throw ConfigError("instances must be at least 1");
            break;
    }
}

json ExperimentConfig::to_json() const {
    json doc;
    doc["kind"] = to_string(kind);
    doc["n"] = n;
    doc["p"] = p;
    doc["q"] = q;
    doc["trials"] = trials;
    if (seed) doc["seed"] = *seed;
    doc["out"] = out.string();
    doc["bounds_degree"] = bounds_degree;
    doc["k_values"] = k_values;
    doc["servers"] = servers;
    doc["tx_rate"] = tx_rate;
    doc["leak_budget"] = leak_budget;
    doc["instances"] = instances;
    doc["random_mappings"] = random_mappings;
    doc["scenarios"] = json::array();
    for (const auto& sc : scenarios) {
        json s{{"label", sc.label},
               {"topology", sc.topology},
               {"protocol", to_string(sc.protocol)},
               {"estimator", to_string(sc.estimator)},
               {"knowledge", to_string(sc.knowledge)}};
        if (sc.n) s["n"] = sc.n;
        if (sc.q) s["q"] = *sc.q;
        doc["scenarios"].push_back(s);
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Degree distributions

DegreeSummary k_approx_degree_summary(std::size_t n, std::size_t k, std::size_t seeds,
                                      std::uint64_t base_seed) {
    DegreeSummary out;
    out.k = k;
    out.seeds = seeds;
    std::vector<double> max_deg, leaves;
    double total_degree = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
        const NetworkGraph g = build_k_approx_line(n, k, derive_seed(base_seed, k, s));
        const DegreeStats stats = degree_stats(g);
        max_deg.push_back(static_cast<double>(stats.max_in_degree));
        leaves.push_back(stats.fraction_with_in_degree(0));
        total_degree += stats.mean_total_degree();
        if (out.in_degree_fraction.size() <= stats.max_in_degree)
            out.in_degree_fraction.resize(stats.max_in_degree + 1, 0.0);
        for (const auto& [d, count] : stats.in_degree_histogram)
            out.in_degree_fraction[d] += static_cast<double>(count) / static_cast<double>(n);
    }
    for (double& f : out.in_degree_fraction) f /= static_cast<double>(seeds);
    const MeanStderr m = mean_stderr(max_deg), l = mean_stderr(leaves);
    out.mean_max_in_degree = m.mean;
    out.max_in_degree_se = m.se;
    out.leaf_fraction = l.mean;
    out.leaf_fraction_se = l.se;
    out.mean_total_degree = total_degree / static_cast<double>(seeds);
    return out;
}

// ---------------------------------------------------------------------------
// Leakage

LeakageRow leakage_row(std::size_t servers, double p, double tx_rate, double leak_budget, double q,
                       std::size_t repetitions, std::uint64_t seed) {
    LeakageRow row{servers, p, tx_rate, leak_budget, typical_ward_size(p),
                   refresh_interval(servers, p, tx_rate, leak_budget), q, 0, 0.0};
    row.simulated_txs = static_cast<std::size_t>(std::llround(row.interval_s * tx_rate));
    if (repetitions == 0) return row;
    double total = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
        const NetworkGraph g = place_adversaries(build_spliced_line(servers, derive_seed(seed, r, 1)),
                                                 p, derive_seed(seed, r, 2));
        std::vector<bool> interior(servers, false);
        std::size_t interior_count = 0;
        for (NodeId v = 0; v < servers; ++v) {
            if (g.is_spy(v)) continue;
            if (!g.is_spy(g.out_neighbors(v)[0]) && !g.is_spy(g.in_neighbors(v)[0])) {
                interior[v] = true;
                ++interior_count;
            }
        }
        const std::vector<NodeId> honest = g.honest_nodes();
        Rng rng(derive_seed(seed, r, 3));
        GroundTruth traffic;
        for (std::size_t i = 0; i < row.simulated_txs; ++i) {
            traffic.txs.push_back(TxId{i});
            traffic.sources.push_back(honest[rng.uniform_below(honest.size())]);
        }
        const ObservationLog log = run_dandelion(g, DandelionParams{q, 0}, traffic,
                                                 derive_seed(seed, r, 4));
        std::set<NodeId> revealed;
        for (const auto& t : log.first_spy)
            if (t && t->virtual_exit && interior[t->sender]) revealed.insert(t->sender);
        total += interior_count ? static_cast<double>(revealed.size()) /
                                      static_cast<double>(interior_count)
                                : 0.0;
    }
    row.revealed_interior_fraction = total / static_cast<double>(repetitions);
    return row;
}

// ---------------------------------------------------------------------------
// Oracle check

bool OracleReport::ok(double tol) const {
    return static_max_diff <= tol && (!dynamic_max_diff || *dynamic_max_diff <= tol) &&
           std::abs(matching_objective - oracle_objective) <= tol &&
           argmax_expected_recall + tol >= best_random_expected_recall;
}

OracleReport oracle_instance(std::size_t index, std::uint64_t seed, std::size_t random_mappings) {
    const bool line = index % 2 == 0;
    const double q = (index / 2) % 2 ? 0.3 : 0.0;
    const double p = (index / 4) % 2 ? 0.3 : 0.15;
    const TopologySpec spec = line ? TopologySpec::spliced_line(7) : TopologySpec::d_regular_tree(7, 3);
    const std::uint64_t s = derive_seed(seed, index);
    const NetworkGraph g = place_adversaries(build_topology(spec, derive_seed(s, 1)), p,
                                             derive_seed(s, 2));
    const GroundTruth truth = make_ground_truth(g, derive_seed(s, 3));
    const DandelionParams params{q, 0};
    const ObservationLog log = run_dandelion(g, params, truth, derive_seed(s, 4));
    const AdversaryView view = AdversaryView::full(log, g);

    OracleReport report;
    report.instance = index;
    report.topology = spec.name();
    report.q = q;
    report.honest = g.honest_count();

    const PosteriorModel oracle = brute_force_posterior(g, log, params);
    const PosteriorModel analytic = dandelion_static_posterior(view, params);
    report.static_max_diff = analytic.max_abs_difference(oracle);
    if (line && q == 0.0) {
        const PosteriorModel local_oracle =
            brute_force_posterior(g, log, params, OracleKnowledge::LocalNeighborhood);
        const PosteriorModel local =
            dandelion_dynamic_line_posterior(AdversaryView::local(log, g));
        report.dynamic_max_diff = local.max_abs_difference(local_oracle);
    }

    const SourceMapping matched = matching_estimator(view, analytic, derive_seed(s, 5));
    report.matching_objective = mapping_objective(oracle, matched);
    report.oracle_objective = brute_force_max_matching_objective(oracle);

    const double k = static_cast<double>(report.honest);
    const SourceMapping argmax = recall_optimal_estimator(view, oracle, derive_seed(s, 6));
    report.argmax_expected_recall = mapping_objective(oracle, argmax) / k;
    const std::vector<NodeId> honest = g.honest_nodes();
    for (std::size_t r = 0; r < random_mappings; ++r) {
        const SourceMapping alt = random_mapping(log.txs, honest, derive_seed(s, 7, r));
        report.best_random_expected_recall =
            std::max(report.best_random_expected_recall, mapping_objective(oracle, alt) / k);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct PendingFile {
    std::filesystem::path path;
    std::string content;
};

void commit(const std::vector<PendingFile>& files, RunSummary& summary) {
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& f : files) {
            write_file_atomic(f.path, f.content);
            written.push_back(f.path);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
    summary.files = std::move(written);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg_in, std::ostream* progress) {
    cfg_in.validate();
    ExperimentConfig cfg = cfg_in;
    if (!cfg.seed) {
        std::random_device rd;
        cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    const std::uint64_t seed = *cfg.seed;
    RunSummary summary;
    summary.seed = seed;

    json manifest;
    manifest["software"] = "anonsim";
    manifest["version"] = kVersion;
    manifest["config"] = cfg.to_json();
    manifest["points"] = json::array();
    std::vector<PendingFile> files;
    auto file = [&](const std::string& name, std::string content) {
        files.push_back({cfg.out / name, std::move(content)});
    };

    switch (cfg.kind) {
        case ExperimentKind::Region:
        case ExperimentKind::Sweep: {
            std::size_t point = 0;
            std::vector<BoundRow> bounds;
            for (double p : cfg.p) {
                for (const auto& row : bound_rows(protocol_bounds(p, cfg.n, cfg.bounds_degree)))
                    bounds.push_back(row);
                for (const auto& sc : cfg.scenarios) {
                    const Scenario s = resolve_scenario(sc, cfg, p);
                    const auto t0 = std::chrono::steady_clock::now();
                    const auto results = run_trials_parallel(s, cfg.trials, seed, point);
                    for (const auto& r : results) {
                        const RegionCheck check = assert_region_bounds(r.metrics);
                        if (!check)
                            throw InvariantViolation(
                                s.label + " trial seed " + std::to_string(r.seed) + ": " +
                                    check.detail,
                                r.seed);
                    }
                    DetectionPoint pt = aggregate(metrics_of(results), s.label, s.topology.name(),
                                                  s.topology.n, p, s.q);
                    const double wall = seconds_since(t0);
                    manifest["points"].push_back({{"index", point},
                                                  {"label", s.label},
                                                  {"p", p},
                                                  {"n", s.topology.n},
                                                  {"trials", cfg.trials},
                                                  {"base_seed", seed},
                                                  {"first_trial_seed", trial_seed(seed, point, 0)},
                                                  {"wall_seconds", wall}});
                    if (progress)
                        *progress << s.label << " p=" << p << ": recall " << pt.recall
                                  << " precision " << pt.precision << " (" << wall << " s)\n";
                    summary.points.push_back(std::move(pt));
                    ++point;
                }
            }
            std::ostringstream points_csv, bounds_csv;
            write_points_csv(points_csv, summary.points);
            write_bounds_csv(bounds_csv, bounds);
            file("points.csv", points_csv.str());
            file("bounds.csv", bounds_csv.str());
            break;
        }
        case ExperimentKind::DegreeDist: {
            std::ostringstream hist, sum;
            hist << "k,in_degree,mean_fraction\n";
            sum << "k,seeds,mean_max_in_degree,max_in_degree_se,leaf_fraction,leaf_fraction_se,"
                   "mean_total_degree,leading_term\n";
            for (std::size_t k : cfg.k_values) {
                const auto t0 = std::chrono::steady_clock::now();
                const DegreeSummary d = k_approx_degree_summary(cfg.n, k, cfg.trials, seed);
                for (std::size_t deg = 0; deg < d.in_degree_fraction.size(); ++deg)
                    hist << k << ',' << deg << ',' << format_double(d.in_degree_fraction[deg]) << '\n';
                sum << k << ',' << d.seeds << ',' << format_double(d.mean_max_in_degree) << ','
                    << format_double(d.max_in_degree_se) << ',' << format_double(d.leaf_fraction)
                    << ',' << format_double(d.leaf_fraction_se) << ','
                    << format_double(d.mean_total_degree) << ','
                    << format_double(max_degree_scaling(cfg.n, k)) << '\n';
                manifest["points"].push_back(
                    {{"k", k}, {"seeds", cfg.trials}, {"base_seed", seed},
                     {"wall_seconds", seconds_since(t0)}});
                if (progress)
                    *progress << "k=" << k << ": mean max in-degree " << d.mean_max_in_degree
                              << ", leaf fraction " << d.leaf_fraction << '\n';
            }
            file("degree_hist.csv", hist.str());
            file("degree_summary.csv", sum.str());
            break;
        }
        case ExperimentKind::Leakage: {
            std::ostringstream csv;
            csv << "servers,p,tx_rate,leak_budget,ward_size,interval_s,q,simulated_txs,"
                   "revealed_interior_fraction\n";
            std::size_t point = 0;
            for (double p : cfg.p) {
                const auto t0 = std::chrono::steady_clock::now();
                const LeakageRow r = leakage_row(cfg.servers, p, cfg.tx_rate, cfg.leak_budget,
                                                 cfg.q, cfg.trials, derive_seed(seed, point));
                csv << r.servers << ',' << format_double(r.p) << ',' << format_double(r.tx_rate)
                    << ',' << format_double(r.leak_budget) << ',' << r.ward_size << ','
                    << format_double(r.interval_s) << ',' << format_double(r.q) << ','
                    << r.simulated_txs << ',' << format_double(r.revealed_interior_fraction) << '\n';
                manifest["points"].push_back({{"index", point},
                                              {"p", p},
                                              {"seed", derive_seed(seed, point)},
                                              {"wall_seconds", seconds_since(t0)}});
                if (progress)
                    *progress << "p=" << p << ": refresh every " << r.interval_s << " s, revealed "
                              << r.revealed_interior_fraction << " of interior nodes\n";
                ++point;
            }
            file("leakage.csv", csv.str());
            break;
        }
        case ExperimentKind::OracleCheck: {
            std::ostringstream csv;
            csv << "instance,topology,q,honest,static_max_diff,dynamic_max_diff,"
                   "matching_objective,oracle_objective,argmax_expected_recall,"
                   "best_random_expected_recall,ok\n";
            std::vector<std::size_t> failed;
            for (std::size_t i = 0; i < cfg.instances; ++i) {
                const OracleReport r = oracle_instance(i, seed, cfg.random_mappings);
                csv << r.instance << ',' << r.topology << ',' << format_double(r.q) << ','
                    << r.honest << ',' << format_double(r.static_max_diff) << ','
                    << (r.dynamic_max_diff ? format_double(*r.dynamic_max_diff) : "") << ','
                    << format_double(r.matching_objective) << ','
                    << format_double(r.oracle_objective) << ','
                    << format_double(r.argmax_expected_recall) << ','
                    << format_double(r.best_random_expected_recall) << ','
                    << (r.ok() ? 1 : 0) << '\n';
                if (!r.ok()) failed.push_back(i);
            }
            if (!failed.empty())
                throw InvariantViolation("oracle check failed on instance " +
                                             std::to_string(failed.front()),
                                         derive_seed(seed, failed.front()));
            if (progress) *progress << cfg.instances << " oracle instances agree\n";
            file("oracle.csv", csv.str());
            break;
        }
    }

    json names = json::array();
    for (const auto& f : files) names.push_back(f.path.filename().string());
    manifest["files"] = names;
    file("manifest.json", manifest.dump(2) + "\n");
    commit(files, summary);
    return summary;
}

}  // namespace anonsim
