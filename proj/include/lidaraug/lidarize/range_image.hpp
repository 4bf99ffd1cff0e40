#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/geometry.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// One range-view cell: nearest hit so far and the index of that point in
/// the source cloud. depth < 0 marks an empty cell.
struct RangeCell {
  double depth = -1.0;
  std::size_t source = 0;
  bool occupied() const { return depth >= 0.0; }
};

/// H x W range view plus the cloud it was built from. Row v runs from the
/// top of the FOV (v = 0) down; column u wraps in azimuth.
struct RangeImage {
  SensorConfig config;
  std::vector<RangeCell> cells;  // row-major, H*W
  PointCloud source;
  std::size_t skipped_origin = 0;  // points rejected for lying at the sensor origin

  RangeCell& at(int v, int u) { return cells[v * config.azimuth_resolution + u]; }
  const RangeCell& at(int v, int u) const {
    return cells[v * config.azimuth_resolution + u];
  }
};

/// Forward binning (θ, φ) -> (u, v). Returns false when φ is strictly
/// outside the vertical FOV; at the FOV edges v clamps into [0, H).
inline bool project_angles(double azimuth, double inclination,
                           const SensorConfig& config, int& u, int& v) {
  const double fov_up = config.fov_up_rad();
  const double fov_down = config.fov_down_rad();
  if (inclination > fov_up || inclination < -fov_down) return false;
  const int W = config.azimuth_resolution;
  const int H = config.channels;
  const double fov_total = fov_up + fov_down;

  long uu = static_cast<long>(std::floor(W * (azimuth / M_PI + 1.0) / 2.0));
  uu %= W;
  if (uu < 0) uu += W;
  u = static_cast<int>(uu);

  const long vv =
      static_cast<long>(std::floor(H * (1.0 - (inclination + fov_down) / fov_total)));
  v = static_cast<int>(std::clamp(vv, 0L, static_cast<long>(H - 1)));
  return true;
}

/// Map a sensor-frame cloud into the range view, keeping the minimum-range
/// point per cell. Points at the exact sensor origin are counted in
/// skipped_origin rather than raising.
inline RangeImage project_to_range(const PointCloud& points, const SensorConfig& config) {
  config.validate();
  points.validate();
  RangeImage image;
  image.config = config;
  image.cells.assign(static_cast<std::size_t>(config.channels) *
                         config.azimuth_resolution,
                     RangeCell{});
  image.source = points;

  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points.positions[i];
    if (p.x() == 0.0 && p.y() == 0.0 && p.z() == 0.0) {
      ++image.skipped_origin;
      continue;
    }
    const Spherical s = cart_to_spherical(p);
    int u, v;
    if (!project_angles(s.azimuth, s.inclination, config, u, v)) continue;
    RangeCell& cell = image.at(v, u);
    if (!cell.occupied() || s.range < cell.depth) {
      cell.depth = s.range;
      cell.source = i;
    }
  }
  return image;
}

}  // namespace lidaraug
