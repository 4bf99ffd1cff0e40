#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Minimum-cost perfect matching. target_of[i] is the column matched to
/// row i and forms a bijection on [0, N).
struct Assignment {
  std::vector<std::size_t> target_of;
  double total_cost = 0.0;
};

/// Exact O(n^3) assignment solver (shortest augmenting paths with row and
/// column potentials) over a square cost matrix, row-major.
inline Assignment solve_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) throw ValidationError("solve_assignment: empty cost matrix");
  for (const auto& row : cost)
    if (row.size() != n)
      throw ValidationError("solve_assignment: cost matrix must be square");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based; p[j] = row assigned to column j, column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      std::size_t j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Assignment result;
  result.target_of.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result.target_of[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i)
    result.total_cost += cost[i][result.target_of[i]];
  return result;
}

/// Optimal pairing of two equal-size center sets under the L1 distance.
inline Assignment hungarian_match(const std::vector<Vec3>& centers_a,
                                  const std::vector<Vec3>& centers_b) {
  if (centers_a.size() != centers_b.size())
    throw ValidationError("hungarian_match: center counts differ (" +
                          std::to_string(centers_a.size()) + " vs " +
                          std::to_string(centers_b.size()) + ")");
  const std::size_t n = centers_a.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i][j] = (centers_a[i] - centers_b[j]).lpNorm<1>();
  return solve_assignment(cost);
}

}  // namespace lidaraug
