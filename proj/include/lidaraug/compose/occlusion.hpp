#pragma once

#include <cstddef>
#include <vector>

#include "lidaraug/core/geometry.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/lidarize/range_image.hpp"

namespace lidaraug {

/// Resolve mutual occlusion after insertion: every point is projected into
/// the sensor's range view, and within each cell only points lying within
/// eps_depth of the cell's nearest return survive. Points outside the
/// vertical FOV (or at the sensor origin) never contend for a cell and are
/// kept. The frame is expressed relative to the ego origin with the sensor
/// at config.sensor_origin; a sensor-frame cloud is the zero-origin case.
inline LidarFrame occlusion_filter(const LidarFrame& frame, const SensorConfig& config,
                                   double eps_depth = 0.3) {
  config.validate();
  if (!(eps_depth >= 0.0))
    throw ValidationError("occlusion_filter: eps_depth must be >= 0");

  const std::size_t n = frame.points.size();
  const std::size_t n_cells =
      static_cast<std::size_t>(config.channels) * config.azimuth_resolution;
  std::vector<double> min_depth(n_cells, -1.0);
  std::vector<long> cell_of(n, -1);
  std::vector<double> depth_of(n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = frame.points.positions[i] - config.sensor_origin;
    if (p.x() == 0.0 && p.y() == 0.0 && p.z() == 0.0) continue;
    const Spherical s = cart_to_spherical(p);
    int u, v;
    if (!project_angles(s.azimuth, s.inclination, config, u, v)) continue;
    const std::size_t cell = static_cast<std::size_t>(v) * config.azimuth_resolution + u;
    cell_of[i] = static_cast<long>(cell);
    depth_of[i] = s.range;
    if (min_depth[cell] < 0.0 || s.range < min_depth[cell]) min_depth[cell] = s.range;
  }

  LidarFrame out;
  out.boxes = frame.boxes;
  out.ego_pose = frame.ego_pose;
  for (std::size_t i = 0; i < n; ++i) {
    if (cell_of[i] >= 0 &&
        depth_of[i] > min_depth[static_cast<std::size_t>(cell_of[i])] + eps_depth)
      continue;
    out.points.append_from(frame.points, i);
  }
  return out;
}

}  // namespace lidaraug
