#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

struct PcaResult {
  PointCloud aligned;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> aligned
  Vec3 centroid = Vec3::Zero();
};

/// Center a cloud and rotate its principal axes onto x >= y >= z by
/// eigenvalue. Axis signs are disambiguated deterministically: every axis
/// with negative skewness is flipped; if the resulting basis is left-handed
/// the axis with the smallest |skewness| (lowest index on ties) is toggled
/// back so the rotation stays proper. Idempotent up to floating error.
inline PcaResult pca_align(const PointCloud& points) {
  const std::size_t n = points.size();
  if (n < 4) throw DegenerateGeometryError("pca_align: need >= 4 points");

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points.positions) centroid += p;
  centroid /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points.positions) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success)
    throw DegenerateGeometryError("pca_align: eigendecomposition failed");
  const Vec3 evals = solver.eigenvalues();   // ascending
  const Eigen::Matrix3d evecs = solver.eigenvectors();

  if (evals(0) < 0.0 || evals(0) <= 1e-12 * std::max(evals(2), 1e-300))
    throw DegenerateGeometryError("pca_align: rank-deficient covariance");

  // Columns reordered to descending eigenvalue: new x is the major axis.
  Eigen::Matrix3d axes;
  for (int a = 0; a < 3; ++a) axes.col(a) = evecs.col(2 - a);

  // Third moment along each candidate axis decides its sign.
  Vec3 skew = Vec3::Zero();
  for (const auto& p : points.positions) {
    const Vec3 d = p - centroid;
    for (int a = 0; a < 3; ++a) {
      const double t = axes.col(a).dot(d);
      skew[a] += t * t * t;
    }
  }
  for (int a = 0; a < 3; ++a) {
    if (skew[a] < 0.0) {
      axes.col(a) = -axes.col(a);
      skew[a] = -skew[a];
    }
  }
  if (axes.determinant() < 0.0) {
    int weakest = 0;
    for (int a = 1; a < 3; ++a)
      if (skew[a] < skew[weakest]) weakest = a;
    axes.col(weakest) = -axes.col(weakest);
  }

  PcaResult result;
  result.rotation = axes.transpose();
  result.centroid = centroid;
  result.aligned = points;
  for (auto& p : result.aligned.positions) p = result.rotation * (p - centroid);
  return result;
}

}  // namespace lidaraug
