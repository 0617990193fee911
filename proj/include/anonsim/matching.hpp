#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace anonsim {

inline constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);

/// Exact maximum-weight assignment on a dense rows x cols matrix (row-major).
/// Returns, per row, the assigned column or kUnassigned. Every row is
/// assigned when rows <= cols; the total weight is maximal among all
/// injective partial assignments because weights are nonnegative.
std::vector<std::size_t> max_weight_assignment(std::span<const double> weights, std::size_t rows,
                                               std::size_t cols);

inline constexpr std::size_t kMaxSubsetAssignment = 20;

/// Marginals P(row i -> column j) of the distribution over perfect matchings
/// of a k x k nonnegative matrix that weights each matching by the product
/// of its entries. Exponential in k (k <= kMaxSubsetAssignment).
std::vector<double> assignment_marginals(std::span<const double> weights, std::size_t k);

/// Same marginals in polynomial time when the weights factor as
/// alpha_row * beta_col on their support and the row supports are pairwise
/// nested or disjoint; nullopt when the matrix lacks that structure.
std::optional<std::vector<double>> laminar_assignment_marginals(std::span<const double> weights,
                                                                std::size_t k);

}  // namespace anonsim
