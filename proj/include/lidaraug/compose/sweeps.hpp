#pragma once

#include <cmath>
#include <cstddef>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Constant-speed, constant-turn-rate motion along the object's heading.
struct SweepTrajectory {
  double speed = 0.0;     // m/s along the heading
  double yaw_rate = 0.0;  // rad/s, counterclockwise
};

namespace detail {

/// Displacement in the pose frame at t = 0 after driving for time t.
inline Vec2 ctrv_offset(const SweepTrajectory& traj, double t) {
  if (traj.yaw_rate == 0.0) return {traj.speed * t, 0.0};
  const double w = traj.yaw_rate;
  return {traj.speed / w * std::sin(w * t), traj.speed / w * (1.0 - std::cos(w * t))};
}

}  // namespace detail

/// Stack K rigid copies of an object's points along its past trajectory:
/// copy k is the object posed at t = -k*dt under the motion model, tagged
/// time_offset = -k*dt. Copy 0 is the input itself. rgb/intensity channels
/// are carried; output count = K * input count.
inline PointCloud virtual_sweeps(const PointCloud& points, const Box3D& box,
                                 const SweepTrajectory& trajectory, int k_sweeps,
                                 double dt) {
  if (k_sweeps < 1) throw ValidationError("virtual_sweeps: K must be >= 1");
  if (!(dt > 0.0)) throw ValidationError("virtual_sweeps: dt must be > 0");

  const Eigen::Matrix3d to_object = yaw_rotation(box.yaw).transpose();
  PointCloud out;
  out.reserve(points.size() * static_cast<std::size_t>(k_sweeps));

  for (int k = 0; k < k_sweeps; ++k) {
    // k = 0 is the keyframe itself; copy it untouched so the trajectory
    // transform cannot smear it by rounding.
    if (k == 0) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        out.positions.push_back(points.positions[i]);
        if (points.has_rgb()) out.rgb.push_back(points.rgb[i]);
        if (points.has_intensity()) out.intensity.push_back(points.intensity[i]);
        out.time_offset.push_back(0.0);
      }
      continue;
    }
    const double t = -static_cast<double>(k) * dt;
    const Vec2 offset = detail::ctrv_offset(trajectory, t);
    const double yaw_t = box.yaw + trajectory.yaw_rate * t;
    const Eigen::Matrix3d rot_t = yaw_rotation(yaw_t);
    const Vec3 center_t =
        box.center + yaw_rotation(box.yaw) * Vec3(offset.x(), offset.y(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Vec3 local = to_object * (points.positions[i] - box.center);
      out.positions.push_back(rot_t * local + center_t);
      if (points.has_rgb()) out.rgb.push_back(points.rgb[i]);
      if (points.has_intensity()) out.intensity.push_back(points.intensity[i]);
      out.time_offset.push_back(t);
    }
  }
  return out;
}

}  // namespace lidaraug
