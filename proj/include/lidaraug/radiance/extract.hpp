#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <unordered_map>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/radiance/camera.hpp"
#include "lidaraug/radiance/sh.hpp"
#include "lidaraug/radiance/voxel_grid.hpp"

namespace lidaraug {

/// Per-voxel running RGB sum and hit count. count == 0 implies a zero sum
/// (absent key). Merging adds element-wise, so the total is independent of
/// how rays were partitioned across accumulators.
struct ColorAccumulator {
  struct Entry {
    Vec3 rgb_sum = Vec3::Zero();
    std::uint64_t count = 0;
  };
  std::unordered_map<std::uint64_t, Entry> cells;

  void add(std::uint64_t idx, const Vec3& rgb) {
    Entry& e = cells[idx];
    e.rgb_sum += rgb;
    e.count += 1;
  }

  void merge(const ColorAccumulator& other) {
    for (const auto& [idx, e] : other.cells) {
      Entry& mine = cells[idx];
      mine.rgb_sum += e.rgb_sum;
      mine.count += e.count;
    }
  }
};

namespace detail {

/// Clamped per-channel SH decode for one stored record.
inline Vec3 decode_color(const ShVoxelGrid& grid, std::size_t slot, const Vec3& dir) {
  const auto basis = sh_basis(dir, grid.sh_degree);
  const std::size_t k = grid.coeffs_per_channel();
  const double* c = grid.record_coeffs(slot);
  Vec3 rgb;
  for (int ch = 0; ch < 3; ++ch) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) v += c[ch * k + i] * basis[i];
    rgb[ch] = std::clamp(v, 0.0, 1.0);
  }
  return rgb;
}

/// Slab intersection with the grid bounds. Returns false on a miss.
inline bool ray_grid_bounds(const ShVoxelGrid& grid, const Vec3& r_o, const Vec3& r_d,
                            double& t_min, double& t_max) {
  const Vec3 lo = grid.origin;
  const Vec3 hi = grid.origin + grid.voxel_size * Vec3(grid.nx, grid.ny, grid.nz);
  t_min = -std::numeric_limits<double>::infinity();
  t_max = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (r_d[a] == 0.0) {
      if (r_o[a] < lo[a] || r_o[a] > hi[a]) return false;
      continue;
    }
    double t0 = (lo[a] - r_o[a]) / r_d[a];
    double t1 = (hi[a] - r_o[a]) / r_d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
  }
  return t_min <= t_max;
}

}  // namespace detail

/// March one ray through the grid with a fixed step, sampling at step
/// midpoints. Every sample landing in a stored voxel with density >=
/// density_min adds that voxel's clamped view color and one hit; a voxel
/// crossed by several steps of the same ray is counted once per step.
/// Rays missing the grid leave the accumulator unchanged.
inline void march_ray(const ShVoxelGrid& grid, const Vec3& r_o, const Vec3& r_d,
                      double t_step, ColorAccumulator& acc, double density_min = 0.0) {
  if (t_step <= 0.0) throw DomainError("march_ray: t_step must be > 0");
  const double norm = r_d.norm();
  if (norm == 0.0) throw DomainError("march_ray: zero direction");
  const Vec3 dir = r_d / norm;

  double t_min, t_max;
  if (!detail::ray_grid_bounds(grid, r_o, dir, t_min, t_max)) return;
  if (t_max < 0.0) return;

  for (double t = std::max(t_min, 0.0); t < t_max; t += t_step) {
    const Vec3 p = r_o + (t + 0.5 * t_step) * dir;
    const Vec3 rel = (p - grid.origin) / grid.voxel_size;
    if (rel.x() < 0 || rel.y() < 0 || rel.z() < 0) continue;
    const auto ix = static_cast<std::uint64_t>(rel.x());
    const auto iy = static_cast<std::uint64_t>(rel.y());
    const auto iz = static_cast<std::uint64_t>(rel.z());
    if (ix >= grid.nx || iy >= grid.ny || iz >= grid.nz) continue;
    const std::size_t slot = grid.find(grid.linear_index(
        static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy),
        static_cast<std::uint32_t>(iz)));
    if (slot == ShVoxelGrid::npos) continue;
    if (grid.density[slot] < density_min) continue;
    acc.add(grid.l_idx[slot], detail::decode_color(grid, slot, dir));
  }
}

/// March every pixel ray of every view and average the per-voxel hits.
/// Output holds one point per voxel that was hit at least once and meets
/// the density threshold, at the voxel center, rgb = rgb_sum / count,
/// ordered by spatial index. The per-row merge order is fixed, so the
/// result is identical for any jobs count.
inline PointCloud extract_colored_cloud(const ShVoxelGrid& grid,
                                        const std::vector<CameraView>& views,
                                        double t_step = -1.0, double density_min = 0.0,
                                        int jobs = 1) {
  if (views.empty())
    throw ValidationError("extract_colored_cloud: at least one view required");
  if (density_min < 0.0)
    throw ValidationError("extract_colored_cloud: density_min must be >= 0");
  grid.validate();
  for (const auto& v : views) v.validate();
  if (t_step <= 0.0) t_step = grid.voxel_size / 2.0;
  // Build the spatial lookup before the workers share the grid read-only.
  if (!grid.l_idx.empty()) grid.find(grid.l_idx.front());

  // One accumulator per image row; merged in row order below.
  struct RowTask {
    const CameraView* view;
    int v;
  };
  std::vector<RowTask> rows;
  for (const auto& view : views)
    for (int v = 0; v < view.height; ++v) rows.push_back({&view, v});

  std::vector<ColorAccumulator> row_acc(rows.size());
  const int workers = std::max(1, jobs);
  auto run_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const CameraView& view = *rows[r].view;
      for (int u = 0; u < view.width; ++u)
        march_ray(grid, view.translation, view.pixel_ray(u, rows[r].v), t_step,
                  row_acc[r], density_min);
    }
  };
  if (workers == 1 || rows.size() <= 1) {
    run_rows(0, rows.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (rows.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(rows.size(), w * per);
      const std::size_t end = std::min(rows.size(), begin + per);
      if (begin < end) pool.emplace_back(run_rows, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  ColorAccumulator total;
  for (const auto& acc : row_acc) total.merge(acc);

  std::vector<std::size_t> slots(grid.record_count());
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  std::sort(slots.begin(), slots.end(),
            [&](std::size_t a, std::size_t b) { return grid.l_idx[a] < grid.l_idx[b]; });

  PointCloud cloud;
  for (std::size_t slot : slots) {
    if (grid.density[slot] < density_min) continue;
    const auto it = total.cells.find(grid.l_idx[slot]);
    if (it == total.cells.end() || it->second.count == 0) continue;
    cloud.positions.push_back(grid.voxel_center(grid.l_idx[slot]));
    cloud.rgb.push_back(it->second.rgb_sum / static_cast<double>(it->second.count));
  }
  return cloud;
}

}  // namespace lidaraug
