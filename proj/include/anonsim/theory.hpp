#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace anonsim {

enum class BoundDirection { LowerOnOptimal, UpperOnOptimal, Exact };

std::string direction_name(BoundDirection d);

struct BoundEntry {
    std::string name;
    BoundDirection direction = BoundDirection::Exact;
    std::optional<double> value;  // empty when outside the parameter domain
    std::string absent_reason;
};

struct BoundTable {
    double p = 0.0;
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<BoundEntry> entries;

    /// Throws std::out_of_range for unknown names.
    const BoundEntry& entry(const std::string& name) const;
    /// Value of a bound, or nullopt when absent.
    std::optional<double> value(const std::string& name) const;
};

/// Named entries:
///   precision-lower          p^2, lower bound on optimal precision
///   recall-lower             p, lower bound on optimal recall
///   flooding-static          1 - (1-p)^d
///   proxy-first-spy          (p/(1-p)) (1 - e^{p-1})
///   dandelion-recall         p, exact
///   static-tree-matching     p, exact
///   dynamic-tree-first-spy   p/2, lower
///   dynamic-line-loose       (2p^2/(1-p)) ln(2/p), upper
///   dynamic-line-tight       2(p+1/n)^2/(1-p+2/n) ln(1/(p-2/n)) + (1-p)^2/(n(1-3p)), upper
BoundTable protocol_bounds(double p, std::size_t n, std::size_t d);

double dynamic_line_loose_bound(double p);
/// Requires 2/n < p < 1/3.
double dynamic_line_tight_bound(double p, std::size_t n);

/// Leading term of the expected maximum in-degree of a k-approximate line.
double max_degree_scaling(std::size_t n, std::size_t k);

/// Seconds between connection refreshes so that at most leak_budget of the
/// unknown ward interiors are exposed.
double refresh_interval(std::size_t n_servers, double p, double tx_rate_per_sec,
                        double leak_budget);

/// round(1/p), the typical number of honest nodes per ward.
std::size_t typical_ward_size(double p);

}  // namespace anonsim
