#include "anonsim/matching.hpp"

#include <algorithm>
#include <optional>
#include <numeric>
#include <cmath>
#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace anonsim {

std::vector<std::size_t> max_weight_assignment(std::span<const double> weights, std::size_t rows,
                                               std::size_t cols) {
    if (weights.size() != rows * cols) throw std::invalid_argument("weight matrix size mismatch");
    const std::size_t n = std::max(rows, cols);
    if (n == 0) return {};
    double top = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("assignment weights must be nonnegative");
        top = std::max(top, w);
    }
    auto cost = [&](std::size_t r, std::size_t c) {
        return (r < rows && c < cols) ? top - weights[r * cols + c] : top;
    };

    // Shortest augmenting path with potentials, 1-based with a virtual column 0.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = owner[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> result(rows, kUnassigned);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t r = owner[j] - 1;
        if (r < rows && j - 1 < cols) result[r] = j - 1;
    }
    return result;
}

std::vector<double> assignment_marginals(std::span<const double> a, std::size_t k) {
    if (a.size() != k * k) throw std::invalid_argument("weight matrix size mismatch");
    if (k > kMaxSubsetAssignment) throw std::invalid_argument("matrix too large for subset DP");
    if (k == 0) return {};
    // fwd[S]: rows 0..|S|-1 onto columns S; bwd[S]: the last |S| rows onto S.
    // Only nonnegative terms are summed, so structural zeros stay exact.
    const std::size_t full = (std::size_t{1} << k) - 1;
    std::vector<double> fwd(full + 1, 0.0), bwd(full + 1, 0.0);
    fwd[0] = bwd[0] = 1.0;
    for (std::size_t mask = 1; mask <= full; ++mask) {
        const auto used = static_cast<std::size_t>(std::popcount(mask));
        const std::size_t first = used - 1, last = k - used;
        double f = 0.0, b = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (!(mask >> j & 1)) continue;
            const std::size_t rest = mask ^ (std::size_t{1} << j);
            f += fwd[rest] * a[first * k + j];
            b += bwd[rest] * a[last * k + j];
        }
        fwd[mask] = f;
        bwd[mask] = b;
    }
    const double total = fwd[full];
    if (!(total > 0.0)) throw std::invalid_argument("matrix admits no positive perfect matching");
    std::vector<double> out(k * k, 0.0);
    for (std::size_t mask = 0; mask < full; ++mask) {
        if (fwd[mask] == 0.0) continue;
        const auto i = static_cast<std::size_t>(std::popcount(mask));
        for (std::size_t j = 0; j < k; ++j) {
            if (mask >> j & 1 || a[i * k + j] == 0.0) continue;
            out[i * k + j] += fwd[mask] * a[i * k + j] * bwd[full ^ mask ^ (std::size_t{1} << j)];
        }
    }
    for (double& v : out) v /= total;
    return out;
}

std::optional<std::vector<double>> laminar_assignment_marginals(std::span<const double> a,
                                                                std::size_t k) {
    if (a.size() != k * k) throw std::invalid_argument("weight matrix size mismatch");
    std::vector<std::vector<std::size_t>> rows_of(k), cols_of(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (a[i * k + j] < 0.0) throw std::invalid_argument("weights must be nonnegative");
            if (a[i * k + j] > 0.0) {
                cols_of[i].push_back(j);
                rows_of[j].push_back(i);
            }
        }

    // Rank one on the support: log a_ij = la_i + lb_j over each connected piece.
    constexpr double kNone = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> la(k, kNone), lb(k, kNone);
    for (std::size_t start = 0; start < k; ++start) {
        if (!std::isnan(la[start])) continue;
        la[start] = 0.0;
        std::vector<std::size_t> stack{start};  // rows
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j : cols_of[i]) {
                const double lij = std::log(a[i * k + j]);
                if (std::isnan(lb[j])) {
                    lb[j] = lij - la[i];
                    for (std::size_t r : rows_of[j])
                        if (std::isnan(la[r])) {
                            la[r] = std::log(a[r * k + j]) - lb[j];
                            stack.push_back(r);
                        }
                } else if (std::abs(la[i] + lb[j] - lij) > 1e-9 * std::max(1.0, std::abs(lij))) {
                    return std::nullopt;
                }
            }
        }
    }

    // Order rows by support size; nested supports then come inner first.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return cols_of[x].size() < cols_of[y].size();
    });
    std::vector<std::vector<char>> member(k, std::vector<char>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j : cols_of[i]) member[i][j] = 1;

    // f[x] = |S_x| - #(earlier rows nested in S_x); the matching count is
    // their product. Any overlap that is not nesting breaks the formula.
    std::vector<double> f(k);
    for (std::size_t pos = 0; pos < k; ++pos) {
        const std::size_t x = order[pos];
        if (cols_of[x].empty()) return std::nullopt;
        std::size_t nested = 0;
        for (std::size_t prev = 0; prev < pos; ++prev) {
            const std::size_t y = order[prev];
            std::size_t shared = 0;
            for (std::size_t j : cols_of[y]) shared += member[x][j];
            if (shared == cols_of[y].size())
                ++nested;
            else if (shared != 0)
                return std::nullopt;
        }
        f[x] = static_cast<double>(cols_of[x].size()) - static_cast<double>(nested);
        if (f[x] <= 0.0) throw std::invalid_argument("matrix admits no positive perfect matching");
    }

    // Fixing x -> j drops row x and column j. Earlier rows holding j lose a
    // column, scaling the count by (f - 1) / f; later rows holding j lose the
    // column and the nested row x together, so their f is unchanged.
    std::vector<std::vector<std::size_t>> chain(k);  // rows holding column j, in order
    for (std::size_t pos = 0; pos < k; ++pos)
        for (std::size_t j : cols_of[order[pos]]) chain[j].push_back(order[pos]);

    std::vector<double> out(k * k, 0.0);
    for (std::size_t pos = 0; pos < k; ++pos) {
        const std::size_t x = order[pos];
        for (std::size_t j : cols_of[x]) {
            double ratio = 1.0 / f[x];
            for (std::size_t y : chain[j]) {
                if (y == x) break;
                ratio *= (f[y] - 1.0) / f[y];
            }
            out[x * k + j] = ratio;
        }
    }
    return out;
}

}  // namespace anonsim
