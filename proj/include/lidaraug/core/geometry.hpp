#pragma once

#include <cmath>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// (range, azimuth, inclination) of a point in the sensor frame.
/// azimuth = atan2(y, x) in (-pi, pi], inclination = asin(z / range).
struct Spherical {
  double range;
  double azimuth;
  double inclination;
};

inline Spherical cart_to_spherical(const Vec3& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw DomainError("cart_to_spherical: zero-length vector");
  double theta = std::atan2(p.y(), p.x());
  if (theta <= -M_PI) theta = M_PI;  // atan2(-0, negative) edge
  return {r, theta, std::asin(std::clamp(p.z() / r, -1.0, 1.0))};
}

inline Vec3 spherical_to_cart(const Spherical& s) {
  const double cp = std::cos(s.inclination);
  return {s.range * cp * std::cos(s.azimuth),
          s.range * cp * std::sin(s.azimuth),
          s.range * std::sin(s.inclination)};
}

inline Vec3 spherical_to_cart(double range, double azimuth, double inclination) {
  return spherical_to_cart(Spherical{range, azimuth, inclination});
}

/// Rigid transform of all positions: p -> R p + t. Channels carried over.
inline PointCloud transformed(const PointCloud& cloud, const Eigen::Matrix3d& rotation,
                              const Vec3& translation) {
  PointCloud out = cloud;
  for (auto& p : out.positions) p = rotation * p + translation;
  return out;
}

}  // namespace lidaraug
