#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"

namespace lidaraug {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Normalize an angle to (-pi, pi]. Idempotent.
inline double normalize_yaw(double yaw) {
  constexpr double two_pi = 2.0 * M_PI;
  double y = std::fmod(yaw + M_PI, two_pi);
  if (y <= 0.0) y += two_pi;
  return y - M_PI;
}

/// Rotation about +z by `yaw` radians (counterclockwise from +x).
inline Eigen::Matrix3d yaw_rotation(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

/// Columns of 3-D positions with optional per-point channels.
///
/// Every optional channel is either empty or has exactly one value per
/// position. Frames are expressed in the sensor/ego frame: x forward,
/// y left, z up.
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> rgb;             // each component in [0, 1]
  std::vector<double> intensity;     // in [0, 1]
  std::vector<int> ring;             // channel index, >= 0
  std::vector<double> time_offset;   // seconds relative to keyframe

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  bool has_rgb() const { return !rgb.empty(); }
  bool has_intensity() const { return !intensity.empty(); }
  bool has_ring() const { return !ring.empty(); }
  bool has_time() const { return !time_offset.empty(); }

  void reserve(std::size_t n) { positions.reserve(n); }

  /// Check channel-length agreement and value ranges. Throws ValidationError.
  void validate() const {
    const std::size_t n = positions.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!positions[i].allFinite())
        throw ValidationError("non-finite coordinate at point " + std::to_string(i));
    }
    if (has_rgb() && rgb.size() != n)
      throw ValidationError("rgb channel length " + std::to_string(rgb.size()) +
                            " != point count " + std::to_string(n));
    if (has_intensity() && intensity.size() != n)
      throw ValidationError("intensity channel length mismatch");
    if (has_ring() && ring.size() != n)
      throw ValidationError("ring channel length mismatch");
    if (has_time() && time_offset.size() != n)
      throw ValidationError("time_offset channel length mismatch");
    for (std::size_t i = 0; i < intensity.size(); ++i) {
      if (!(intensity[i] >= 0.0 && intensity[i] <= 1.0))
        throw ValidationError("intensity out of [0,1] at point " + std::to_string(i));
    }
    for (std::size_t i = 0; i < ring.size(); ++i) {
      if (ring[i] < 0)
        throw ValidationError("negative ring index at point " + std::to_string(i));
    }
  }

  /// Copy the point at `i` of `src` (all channels present in src) onto the
  /// back of this cloud.
  void append_from(const PointCloud& src, std::size_t i) {
    positions.push_back(src.positions[i]);
    if (src.has_rgb()) rgb.push_back(src.rgb[i]);
    if (src.has_intensity()) intensity.push_back(src.intensity[i]);
    if (src.has_ring()) ring.push_back(src.ring[i]);
    if (src.has_time()) time_offset.push_back(src.time_offset[i]);
  }
};

/// LiDAR geometry. fov_down is stored positive (30 means the beam fan
/// reaches 30 degrees below horizontal).
struct SensorConfig {
  int channels = 32;              // H
  int azimuth_resolution = 1080;  // W
  double fov_up_deg = 10.0;
  double fov_down_deg = 30.0;
  double max_range = 100.0;       // meters
  Vec3 sensor_origin{0.0, 0.0, 1.8};  // in ego frame

  double fov_total_deg() const { return fov_up_deg + fov_down_deg; }
  double fov_up_rad() const { return fov_up_deg * M_PI / 180.0; }
  double fov_down_rad() const { return fov_down_deg * M_PI / 180.0; }
  double fov_total_rad() const { return fov_total_deg() * M_PI / 180.0; }

  void validate() const {
    if (channels < 1) throw ValidationError("sensor channels must be >= 1");
    if (azimuth_resolution < 1)
      throw ValidationError("azimuth resolution must be >= 1");
    if (!(fov_total_deg() > 0.0))
      throw ValidationError("fov_up + fov_down must be positive");
    if (!(max_range > 0.0)) throw ValidationError("max_range must be positive");
  }
};

/// Oriented 3-D box. Yaw is counterclockwise about +z, normalized to (-pi, pi].
struct Box3D {
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 size{1.0, 1.0, 1.0};  // dx, dy, dz
  double yaw = 0.0;
  std::string class_label;
  std::optional<double> score;

  double volume() const { return size.x() * size.y() * size.z(); }
  double bottom_z() const { return center.z() - 0.5 * size.z(); }

  void validate() const {
    if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0))
      throw ValidationError("box dimensions must be positive");
  }

  /// True when `p` lies inside the box scaled by `inflate` about its center.
  bool contains(const Vec3& p, double inflate = 1.0) const {
    const Vec3 d = p - center;
    const double c = std::cos(yaw), s = std::sin(yaw);
    const double lx = c * d.x() + s * d.y();
    const double ly = -s * d.x() + c * d.y();
    return std::abs(lx) <= 0.5 * size.x() * inflate &&
           std::abs(ly) <= 0.5 * size.y() * inflate &&
           std::abs(d.z()) <= 0.5 * size.z() * inflate;
  }
};

/// One LiDAR keyframe: points in ego frame plus box annotations.
struct LidarFrame {
  PointCloud points;
  std::vector<Box3D> boxes;
  std::optional<Eigen::Isometry3d> ego_pose;  // ego -> global

  void validate() const {
    points.validate();
    for (const auto& b : boxes) b.validate();
  }
};

}  // namespace lidaraug
