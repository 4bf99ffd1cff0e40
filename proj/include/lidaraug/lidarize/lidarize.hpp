#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/geometry.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/lidarize/range_image.hpp"

namespace lidaraug {

/// Angles of the regular lattice a range-view cell back-projects to.
inline double rearranged_inclination(int v, const SensorConfig& config) {
  return (1.0 - (v + 0.5) / config.channels) * config.fov_total_rad() -
         config.fov_down_rad();
}

inline double rearranged_azimuth(int u, const SensorConfig& config) {
  return M_PI * (2.0 * (u + 0.5) / config.azimuth_resolution - 1.0);
}

/// Back-project every occupied cell onto the regular angular lattice,
/// keeping the cell depth and the surviving point's rgb/intensity.
inline PointCloud rearrange(const RangeImage& image) {
  const SensorConfig& config = image.config;
  PointCloud out;
  const bool carry_rgb = image.source.has_rgb();
  const bool carry_intensity = image.source.has_intensity();
  for (int v = 0; v < config.channels; ++v) {
    const double inclination = rearranged_inclination(v, config);
    for (int u = 0; u < config.azimuth_resolution; ++u) {
      const RangeCell& cell = image.at(v, u);
      if (!cell.occupied()) continue;
      out.positions.push_back(
          spherical_to_cart(cell.depth, rearranged_azimuth(u, config), inclination));
      if (carry_rgb) out.rgb.push_back(image.source.rgb[cell.source]);
      if (carry_intensity)
        out.intensity.push_back(image.source.intensity[cell.source]);
    }
  }
  return out;
}

/// Sensor-faithful resampling of a dense object cloud: place the object at
/// (center, yaw) in the sensor frame, project into the range view, keep the
/// nearest return per cell, back-project onto the regular lattice, and
/// return the surviving points in the object frame.
inline PointCloud lidarize_object(const PointCloud& dense, const Vec3& center,
                                  double yaw, const SensorConfig& config) {
  if (center.isZero(0.0))
    throw DomainError("lidarize_object: object center at the sensor origin");
  const Eigen::Matrix3d R = yaw_rotation(yaw);
  const PointCloud placed = transformed(dense, R, center);
  const RangeImage image = project_to_range(placed, config);
  PointCloud sparse = rearrange(image);
  const Eigen::Matrix3d R_inv = R.transpose();
  for (auto& p : sparse.positions) p = R_inv * (p - center);
  return sparse;
}

/// Keep entries whose center lies within `threshold` meters of the sensor
/// in the ground plane (inclusive boundary).
inline bool within_distance(const Vec3& center, double threshold) {
  return center.head<2>().norm() <= threshold;
}

inline std::vector<Box3D> distance_filter(const std::vector<Box3D>& boxes,
                                          double threshold) {
  if (threshold <= 0.0) throw ValidationError("distance_filter: threshold must be > 0");
  std::vector<Box3D> kept;
  for (const auto& b : boxes)
    if (within_distance(b.center, threshold)) kept.push_back(b);
  return kept;
}

template <typename Entry>
std::vector<Entry> distance_filter_entries(const std::vector<Entry>& entries,
                                           double threshold) {
  if (threshold <= 0.0) throw ValidationError("distance_filter: threshold must be > 0");
  std::vector<Entry> kept;
  for (const auto& e : entries)
    if (within_distance(e.center(), threshold)) kept.push_back(e);
  return kept;
}

}  // namespace lidaraug
