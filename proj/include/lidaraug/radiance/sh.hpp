#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Real spherical harmonics, degrees 0..2, ordered
/// (Y00, Y1-1, Y10, Y11, Y2-2, Y2-1, Y20, Y21, Y22), i.e. degree-major with
/// m ascending. Y1-1 carries y, Y10 carries z, Y11 carries x.
inline constexpr std::size_t sh_count(int degree) {
  return static_cast<std::size_t>((degree + 1) * (degree + 1));
}

inline constexpr double kSh0 = 0.28209479177387814;  // 1/(2*sqrt(pi))
inline constexpr double kSh1 = 0.4886025119029199;   // sqrt(3/(4*pi))
inline constexpr double kSh2_2 = 1.0925484305920792;
inline constexpr double kSh20 = 0.31539156525252005;
inline constexpr double kSh22 = 0.5462742152960396;

/// Basis values at a unit direction. Throws DomainError when |direction|
/// deviates from 1 by more than 1e-6 or the degree is outside 0..2.
inline std::array<double, 9> sh_basis(const Vec3& direction, int degree) {
  if (degree < 0 || degree > 2)
    throw DomainError("sh_basis: degree must be 0..2, got " + std::to_string(degree));
  if (std::abs(direction.norm() - 1.0) > 1e-6)
    throw DomainError("sh_basis: direction must be unit length");

  const double x = direction.x(), y = direction.y(), z = direction.z();
  std::array<double, 9> b{};
  b[0] = kSh0;
  if (degree >= 1) {
    b[1] = kSh1 * y;
    b[2] = kSh1 * z;
    b[3] = kSh1 * x;
  }
  if (degree >= 2) {
    b[4] = kSh2_2 * x * y;
    b[5] = kSh2_2 * y * z;
    b[6] = kSh20 * (3.0 * z * z - 1.0);
    b[7] = kSh2_2 * x * z;
    b[8] = kSh22 * (x * x - y * y);
  }
  return b;
}

}  // namespace lidaraug
