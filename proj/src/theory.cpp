#include "anonsim/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace anonsim {

std::string direction_name(BoundDirection d) {
    switch (d) {
        case BoundDirection::LowerOnOptimal: return "lower";
        case BoundDirection::UpperOnOptimal: return "upper";
        case BoundDirection::Exact: return "exact";
    }
    return "unknown";
}

const BoundEntry& BoundTable::entry(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw std::out_of_range("no bound named " + name);
}

std::optional<double> BoundTable::value(const std::string& name) const {
    return entry(name).value;
}

double dynamic_line_loose_bound(double p) {
    return 2.0 * p * p / (1.0 - p) * std::log(2.0 / p);
}

double dynamic_line_tight_bound(double p, std::size_t n) {
    const double nn = static_cast<double>(n);
    if (!(p > 2.0 / nn && p < 1.0 / 3.0))
        throw std::domain_error("tight line bound needs 2/n < p < 1/3");
    const double a = p + 1.0 / nn;
    return 2.0 * a * a / (1.0 - p + 2.0 / nn) * std::log(1.0 / (p - 2.0 / nn)) +
           (1.0 - p) * (1.0 - p) / (nn * (1.0 - 3.0 * p));
}

BoundTable protocol_bounds(double p, std::size_t n, std::size_t d) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("p must lie in (0,1)");
    BoundTable table{p, n, d, {}};
    using BD = BoundDirection;
    auto add = [&](std::string name, BD dir, double value) {
        table.entries.push_back({std::move(name), dir, value, {}});
    };
    auto absent = [&](std::string name, BD dir, std::string reason) {
        table.entries.push_back({std::move(name), dir, std::nullopt, std::move(reason)});
    };

    add("precision-lower", BD::LowerOnOptimal, p * p);
    add("recall-lower", BD::LowerOnOptimal, p);
    if (d >= 1)
        add("flooding-static", BD::LowerOnOptimal, 1.0 - std::pow(1.0 - p, static_cast<double>(d)));
    else
        absent("flooding-static", BD::LowerOnOptimal, "degree d must be at least 1");
    add("proxy-first-spy", BD::LowerOnOptimal, p / (1.0 - p) * (1.0 - std::exp(p - 1.0)));
    add("dandelion-recall", BD::Exact, p);
    add("static-tree-matching", BD::Exact, p);
    add("dynamic-tree-first-spy", BD::LowerOnOptimal, p / 2.0);
    if (p < 1.0 / 3.0)
        add("dynamic-line-loose", BD::UpperOnOptimal, std::min(1.0, dynamic_line_loose_bound(p)));
    else
        absent("dynamic-line-loose", BD::UpperOnOptimal, "requires p < 1/3");
    if (n > 0 && p > 2.0 / static_cast<double>(n) && p < 1.0 / 3.0)
        add("dynamic-line-tight", BD::UpperOnOptimal,
            std::min(1.0, dynamic_line_tight_bound(p, n)));
    else
        absent("dynamic-line-tight", BD::UpperOnOptimal, "requires 2/n < p < 1/3");
    return table;
}

double max_degree_scaling(std::size_t n, std::size_t k) {
    if (n < 16) throw std::domain_error("max_degree_scaling needs n >= 16");
    if (k == 0) throw std::domain_error("k must be positive");
    const double ln_n = std::log(static_cast<double>(n));
    if (k == 1) return ln_n / std::log(ln_n);
    return std::log(ln_n) / std::log(static_cast<double>(k));
}

std::size_t typical_ward_size(double p) {
    if (!(p > 0.0)) throw std::domain_error("p must be positive");
    return static_cast<std::size_t>(std::llround(1.0 / p));
}

double refresh_interval(std::size_t n_servers, double p, double tx_rate_per_sec,
                        double leak_budget) {
    if (!(p > 0.0 && p < 0.5)) throw std::domain_error("p must lie in (0, 0.5)");
    if (!(tx_rate_per_sec > 0.0)) throw std::domain_error("transaction rate must be positive");
    if (!(leak_budget >= 0.0 && leak_budget <= 1.0))
        throw std::domain_error("leak budget must lie in [0, 1]");
    const std::size_t w = typical_ward_size(p);
    if (w <= 2) throw std::domain_error("wards of size <= 2 have no interior to protect");
    const double unknown = static_cast<double>(w - 2) / static_cast<double>(w);
    return static_cast<double>(n_servers) * unknown * leak_budget / tx_rate_per_sec;
}

}  // namespace anonsim
