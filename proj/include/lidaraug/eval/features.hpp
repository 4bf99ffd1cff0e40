#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

inline constexpr int kFeatureDim = 16;

using FeatureVector = Eigen::Matrix<double, kFeatureDim, 1>;

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  // Linear interpolation between the closest ranks.
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

/// Hand-crafted 16-dim shape/intensity descriptor of one boxed object.
/// Components: log point count; box dx, dy, dz; z-quantiles 0.1/0.5/0.9
/// above the box bottom; radial mean/std about the center axis; intensity
/// mean/std/median (zeros without an intensity channel); covariance
/// eigenvalue ratios l2/l1, l3/l1; dz / max(dx, dy); occupied fraction of a
/// 4x4x4 in-box grid. Every component only sees box-frame geometry, so
/// rotating or translating the (points, box) pair about z changes nothing.
inline FeatureVector featurize(const PointCloud& points, const Box3D& box) {
  const std::size_t n = points.size();
  if (n < 4) throw ValidationError("featurize: need >= 4 points, got " +
                                   std::to_string(n));
  box.validate();

  // Box frame: centered on the box, yaw removed.
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  std::vector<Vec3> local(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 d = points.positions[i] - box.center;
    local[i] = Vec3(c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z());
  }

  FeatureVector f = FeatureVector::Zero();
  f[0] = std::log(static_cast<double>(n));
  f[1] = box.size.x();
  f[2] = box.size.y();
  f[3] = box.size.z();

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = local[i].z() + 0.5 * box.size.z();
  std::sort(z.begin(), z.end());
  f[4] = detail::quantile_sorted(z, 0.1);
  f[5] = detail::quantile_sorted(z, 0.5);
  f[6] = detail::quantile_sorted(z, 0.9);

  double r_sum = 0.0, r_sq = 0.0;
  for (const auto& p : local) {
    const double r = p.norm();
    r_sum += r;
    r_sq += r * r;
  }
  const double r_mean = r_sum / static_cast<double>(n);
  f[7] = r_mean;
  f[8] = std::sqrt(std::max(0.0, r_sq / static_cast<double>(n) - r_mean * r_mean));

  if (points.has_intensity()) {
    double sum = 0.0, sq = 0.0;
    std::vector<double> vals(points.intensity);
    for (double v : vals) {
      sum += v;
      sq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    f[9] = mean;
    f[10] = std::sqrt(std::max(0.0, sq / static_cast<double>(n) - mean * mean));
    std::sort(vals.begin(), vals.end());
    f[11] = detail::quantile_sorted(vals, 0.5);
  }

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : local) centroid += p;
  centroid /= static_cast<double>(n);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : local) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Vec3 evals = solver.eigenvalues().cwiseMax(0.0);  // ascending
  if (evals[2] > 1e-12) {
    f[12] = evals[1] / evals[2];
    f[13] = evals[0] / evals[2];
  }

  f[14] = box.size.z() / std::max(box.size.x(), box.size.y());

  constexpr int kGrid = 4;
  bool occupied[kGrid * kGrid * kGrid] = {};
  for (const auto& p : local) {
    int idx[3];
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      const double t = (p[a] / box.size[a] + 0.5) * kGrid;
      const int cell = static_cast<int>(std::floor(t));
      idx[a] = std::clamp(cell, 0, kGrid - 1);
      if (t < -1e-9 || t > kGrid + 1e-9) inside = false;
    }
    if (inside) occupied[(idx[2] * kGrid + idx[1]) * kGrid + idx[0]] = true;
  }
  int filled = 0;
  for (bool b : occupied) filled += b ? 1 : 0;
  f[15] = static_cast<double>(filled) / static_cast<double>(kGrid * kGrid * kGrid);

  for (int i = 0; i < kFeatureDim; ++i)
    if (!std::isfinite(f[i]))
      throw ValidationError("featurize: non-finite component " + std::to_string(i));
  return f;
}

}  // namespace lidaraug
