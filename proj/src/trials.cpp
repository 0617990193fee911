#include "anonsim/trials.hpp"

#include <exception>
#include <stdexcept>

#include "anonsim/adversary.hpp"
#include "anonsim/rng.hpp"
#include "anonsim/spreading.hpp"

namespace anonsim {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& s, const std::pair<const char*, Enum> (&table)[N],
                const char* what) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

template <typename Enum, std::size_t N>
std::string enum_name(Enum e, const std::pair<const char*, Enum> (&table)[N]) {
    for (const auto& [name, value] : table)
        if (e == value) return name;
    return "unknown";
}

constexpr std::pair<const char*, Protocol> kProtocols[] = {
    {"dandelion", Protocol::Dandelion},
    {"flooding", Protocol::Flooding},
    {"diffusion", Protocol::Diffusion},
    {"diffusion-by-proxy", Protocol::DiffusionByProxy},
};
constexpr std::pair<const char*, Estimator> kEstimators[] = {
    {"first-spy", Estimator::FirstSpy},
    {"matching", Estimator::Matching},
    {"recall-optimal", Estimator::RecallOptimal},
    {"flooding-ward", Estimator::FloodingWard},
    {"flooding-threshold", Estimator::FloodingThreshold},
    {"random", Estimator::Random},
};
constexpr std::pair<const char*, Knowledge> kKnowledge[] = {
    {"static", Knowledge::Static},
    {"dynamic", Knowledge::Dynamic},
};

}  // namespace

std::string to_string(Protocol p) { return enum_name(p, kProtocols); }
std::string to_string(Estimator e) { return enum_name(e, kEstimators); }
std::string to_string(Knowledge k) { return enum_name(k, kKnowledge); }
Protocol parse_protocol(const std::string& s) { return parse_enum(s, kProtocols, "protocol"); }
Estimator parse_estimator(const std::string& s) { return parse_enum(s, kEstimators, "estimator"); }
Knowledge parse_knowledge(const std::string& s) { return parse_enum(s, kKnowledge, "knowledge"); }

void Scenario::validate() const {
    topology.validate();
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in [0,1)");
    const std::size_t spies = spy_count_for(topology.n, p);
    if (spies == 0 || spies >= topology.n)
        throw std::invalid_argument("floor(n p) must lie in [1, n-1]");
    auto reject = [&](const std::string& why) {
        throw std::invalid_argument(label + ": " + to_string(estimator) + " estimator " + why);
    };
    switch (estimator) {
        case Estimator::FirstSpy:
        case Estimator::Random:
            break;
        case Estimator::Matching:
        case Estimator::RecallOptimal:
            if (protocol != Protocol::Dandelion) reject("needs the dandelion protocol");
            if (knowledge == Knowledge::Dynamic &&
                !(topology.kind == TopologyKind::Cycle || topology.kind == TopologyKind::SplicedLine))
                reject("with dynamic knowledge needs a cycle or spliced line");
            if (knowledge == Knowledge::Dynamic && q != 0.0) reject("with dynamic knowledge needs q = 0");
            if (topology.kind == TopologyKind::RandomRegular || topology.kind == TopologyKind::Complete ||
                topology.kind == TopologyKind::UndirectedRegular ||
                topology.kind == TopologyKind::DirectedRegular)
                reject("needs honest out-degree <= 1");
            break;
        case Estimator::FloodingWard:
            if (protocol != Protocol::Flooding || knowledge != Knowledge::Static)
                reject("needs flooding with static knowledge");
            break;
        case Estimator::FloodingThreshold:
            if (protocol != Protocol::Flooding) reject("needs the flooding protocol");
            break;
    }
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t point, std::size_t trial) {
    return derive_seed(base_seed, point, trial);
}

TrialResult run_trial(const Scenario& s, std::uint64_t seed) {
    const NetworkGraph base = build_topology(s.topology, derive_seed(seed, 1));
    const NetworkGraph g = place_adversaries(base, s.p, derive_seed(seed, 2));
    const GroundTruth truth = make_ground_truth(g, derive_seed(seed, 3));
    const std::uint64_t protocol_seed = derive_seed(seed, 4);
    const std::uint64_t estimator_seed = derive_seed(seed, 5);

    ObservationLog log;
    const DandelionParams params{s.q, 0};
    switch (s.protocol) {
        case Protocol::Dandelion:
            log = run_dandelion(g, params, truth, protocol_seed);
            break;
        case Protocol::Flooding: {
            FloodingOptions options;
            options.rounds_after_first_spy =
                s.estimator == Estimator::FloodingThreshold ? flooding_round_offset(g.size()) : 0;
            log = run_flooding(g, truth, options);
            break;
        }
        case Protocol::Diffusion: {
            DiffusionOptions options;
            options.first_spy_only = true;
            log = run_diffusion(g, truth, protocol_seed, options);
            break;
        }
        case Protocol::DiffusionByProxy:
            log = run_diffusion_by_proxy(g, truth, protocol_seed);
            break;
    }

    const AdversaryView view = s.knowledge == Knowledge::Static ? AdversaryView::full(log, g)
                                                                : AdversaryView::local(log, g);
    auto posterior = [&] {
        return s.knowledge == Knowledge::Static ? dandelion_static_posterior(view, params)
                                                : dandelion_dynamic_line_posterior(view);
    };
    SourceMapping mapping;
    switch (s.estimator) {
        case Estimator::FirstSpy: mapping = first_spy_estimator(view); break;
        case Estimator::Matching: mapping = matching_estimator(view, posterior(), estimator_seed); break;
        case Estimator::RecallOptimal:
            mapping = recall_optimal_estimator(view, posterior(), estimator_seed);
            break;
        case Estimator::FloodingWard: mapping = flooding_static_estimator(view, estimator_seed); break;
        case Estimator::FloodingThreshold:
            mapping = flooding_dynamic_estimator(view, s.p, estimator_seed);
            break;
        case Estimator::Random: mapping = random_mapping(log.txs, g.honest_nodes(), estimator_seed); break;
    }
    return TrialResult{seed, evaluate_trial(mapping, truth)};
}

std::vector<TrialResult> run_trials_serial(const Scenario& scenario, std::size_t trials,
                                           std::uint64_t base_seed, std::size_t point) {
    scenario.validate();
    std::vector<TrialResult> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t)
        out.push_back(run_trial(scenario, trial_seed(base_seed, point, t)));
    return out;
}

std::vector<TrialResult> run_trials_parallel(const Scenario& scenario, std::size_t trials,
                                             std::uint64_t base_seed, std::size_t point) {
    scenario.validate();
    std::vector<TrialResult> out(trials);
    std::vector<std::exception_ptr> errors(trials);
    const auto count = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t t = 0; t < count; ++t) {
        const auto i = static_cast<std::size_t>(t);
        try {
            out[i] = run_trial(scenario, trial_seed(base_seed, point, i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<TrialMetrics> metrics_of(const std::vector<TrialResult>& results) {
    std::vector<TrialMetrics> out;
    out.reserve(results.size());
    for (const auto& r : results) out.push_back(r.metrics);
    return out;
}

}  // namespace anonsim
