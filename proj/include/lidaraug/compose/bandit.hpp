#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/rng.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Per-cell success/failure counts over the placement area. Counts start
/// at 1 so every Beta(fail, success) stays proper.
struct BanditGrid {
  double cell_edge = 0.6;  // meters
  double radius = 51.2;    // half side length, matches the raster area
  Vec2 center = Vec2::Zero();
  std::vector<std::uint32_t> success;
  std::vector<std::uint32_t> failure;
  std::size_t outside = 0;  // predictions that mapped to no cell

  int side() const {
    return static_cast<int>(std::ceil(2.0 * radius / cell_edge));
  }
  std::size_t cell_count() const { return success.size(); }

  static BanditGrid make(double cell_edge = 0.6, double radius = 51.2,
                         const Vec2& center = Vec2::Zero()) {
    BanditGrid grid;
    grid.cell_edge = cell_edge;
    grid.radius = radius;
    grid.center = center;
    if (!(cell_edge > 0.0)) throw ValidationError("BanditGrid: cell_edge must be > 0");
    if (!(radius > 0.0)) throw ValidationError("BanditGrid: radius must be > 0");
    const std::size_t n = static_cast<std::size_t>(grid.side()) * grid.side();
    grid.success.assign(n, 1);
    grid.failure.assign(n, 1);
    return grid;
  }

  /// Cell index under a world position, or npos outside the grid.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t cell_of(double x, double y) const {
    const int cx = static_cast<int>(std::floor((x - (center.x() - radius)) / cell_edge));
    const int cy = static_cast<int>(std::floor((y - (center.y() - radius)) / cell_edge));
    const int s = side();
    if (cx < 0 || cx >= s || cy < 0 || cy >= s) return npos;
    return static_cast<std::size_t>(cy) * s + cx;
  }

  Vec2 cell_center(std::size_t index) const {
    const int s = side();
    const int cy = static_cast<int>(index) / s;
    const int cx = static_cast<int>(index) % s;
    return {center.x() - radius + (cx + 0.5) * cell_edge,
            center.y() - radius + (cy + 0.5) * cell_edge};
  }

  void validate() const {
    if (!(cell_edge > 0.0)) throw ValidationError("BanditGrid: cell_edge must be > 0");
    if (!(radius > 0.0)) throw ValidationError("BanditGrid: radius must be > 0");
    const std::size_t n = static_cast<std::size_t>(side()) * side();
    if (success.size() != n || failure.size() != n)
      throw ValidationError("BanditGrid: count arrays do not match the grid");
    for (std::size_t i = 0; i < n; ++i)
      if (success[i] < 1 || failure[i] < 1)
        throw ValidationError("BanditGrid: counts must stay >= 1");
  }
};

/// One detector verdict on a box: its confidence score and whether it was
/// a true positive.
struct BanditObservation {
  Box3D box;
  bool true_positive = false;
};

/// Fold detector feedback into the grid: confident true positives bump the
/// cell's success count, confident mistakes bump its failure count, and
/// scores at or below 0.5 change nothing. Boxes outside the grid only
/// increment the outside counter.
inline void bandit_update(BanditGrid& grid,
                          const std::vector<BanditObservation>& observations) {
  grid.validate();
  for (const auto& ob : observations) {
    const double score = ob.box.score.value_or(0.0);
    if (!(score > 0.5)) continue;
    const std::size_t cell = grid.cell_of(ob.box.center.x(), ob.box.center.y());
    if (cell == BanditGrid::npos) {
      ++grid.outside;
      continue;
    }
    if (ob.true_positive)
      ++grid.success[cell];
    else
      ++grid.failure[cell];
  }
}

/// Thompson sampling: one Beta(alpha = failure, beta = success) draw per
/// cell, then the n cells with the largest draws (descending; ties to the
/// lower cell index). High failure counts pull selection toward cells the
/// detector struggles with. Deterministic under a fixed seed.
inline std::vector<std::size_t> bandit_select(const BanditGrid& grid, std::size_t n,
                                              std::uint64_t seed) {
  grid.validate();
  if (n > grid.cell_count())
    throw ValidationError("bandit_select: n = " + std::to_string(n) +
                          " exceeds cell count " + std::to_string(grid.cell_count()));
  Rng rng(seed);
  std::vector<std::pair<double, std::size_t>> draws(grid.cell_count());
  for (std::size_t i = 0; i < grid.cell_count(); ++i)
    draws[i] = {rng.beta(static_cast<double>(grid.failure[i]),
                         static_cast<double>(grid.success[i])),
                i};
  std::partial_sort(draws.begin(), draws.begin() + n, draws.end(),
                    [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first
                                                : a.second < b.second;
                    });
  std::vector<std::size_t> cells(n);
  for (std::size_t i = 0; i < n; ++i) cells[i] = draws[i].second;
  return cells;
}

// ---------------------------------------------------------------------------
// Persistence: `cell_edge radius cx cy outside` header line, then one
// `success failure` line per cell in index order.

inline void write_bandit_grid(const BanditGrid& grid, const std::filesystem::path& path) {
  grid.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out.precision(17);
  out << grid.cell_edge << ' ' << grid.radius << ' ' << grid.center.x() << ' '
      << grid.center.y() << ' ' << grid.outside << '\n';
  for (std::size_t i = 0; i < grid.cell_count(); ++i)
    out << grid.success[i] << ' ' << grid.failure[i] << '\n';
}

inline BanditGrid read_bandit_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path.string());
  BanditGrid grid;
  if (!(in >> grid.cell_edge >> grid.radius >> grid.center.x() >> grid.center.y() >>
        grid.outside))
    throw FormatError(path.string() + ": malformed bandit grid header");
  const std::size_t n = static_cast<std::size_t>(grid.side()) * grid.side();
  grid.success.resize(n);
  grid.failure.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(in >> grid.success[i] >> grid.failure[i]))
      throw FormatError(path.string() + ": truncated at cell " + std::to_string(i));
  grid.validate();
  return grid;
}

}  // namespace lidaraug
