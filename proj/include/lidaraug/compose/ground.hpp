#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <unordered_map>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

namespace detail {

inline std::uint64_t pack_cell(int ix, int iy) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
         static_cast<std::uint32_t>(iy);
}

}  // namespace detail

/// Ground model for one frame: a robust global plane z = ax + by + c plus
/// per-cell inlier-mean heights where ground returns exist. Cells without
/// inliers fall back to the plane.
struct GroundEstimate {
  double cell = 0.5;                      // BEV cell edge, meters
  Vec3 plane = Vec3::Zero();              // z = plane[0]*x + plane[1]*y + plane[2]
  std::unordered_map<std::uint64_t, double> cell_height;
  std::vector<std::size_t> inliers;       // indices into the source frame points

  std::uint64_t cell_key(double x, double y) const {
    return detail::pack_cell(static_cast<int>(std::floor(x / cell)),
                             static_cast<int>(std::floor(y / cell)));
  }

  bool cell_has_inlier(double x, double y) const {
    return cell_height.count(cell_key(x, y)) != 0;
  }

  double plane_height(double x, double y) const {
    return plane[0] * x + plane[1] * y + plane[2];
  }

  /// Ground height under (x, y): the cell's inlier mean when the cell has
  /// ground returns, the fitted plane otherwise.
  double height_at(double x, double y) const {
    const auto it = cell_height.find(cell_key(x, y));
    return it != cell_height.end() ? it->second : plane_height(x, y);
  }
};

/// Estimate the ground from a frame: per BEV cell the lowest point is a
/// ground candidate; a plane is fit to the candidates by least squares with
/// three Cauchy reweighting rounds; candidates within z_tol of the plane
/// are the ground inliers.
inline GroundEstimate estimate_ground(const LidarFrame& frame, double cell = 0.5,
                                      double z_tol = 0.2) {
  if (cell <= 0.0) throw ValidationError("estimate_ground: cell must be > 0");
  if (z_tol <= 0.0) throw ValidationError("estimate_ground: z_tol must be > 0");

  const PointCloud& points = frame.points;
  std::unordered_map<std::uint64_t, std::size_t> lowest;  // cell -> point index
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points.positions[i];
    const std::uint64_t key =
        detail::pack_cell(static_cast<int>(std::floor(p.x() / cell)),
                          static_cast<int>(std::floor(p.y() / cell)));
    const auto it = lowest.find(key);
    if (it == lowest.end() || p.z() < points.positions[it->second].z() ||
        (p.z() == points.positions[it->second].z() && i < it->second))
      lowest[key] = i;
  }
  if (lowest.size() < 3)
    throw NoGroundError("estimate_ground: only " + std::to_string(lowest.size()) +
                        " candidate cells, need >= 3");

  std::vector<std::size_t> candidates;
  candidates.reserve(lowest.size());
  for (const auto& [key, idx] : lowest) candidates.push_back(idx);
  std::sort(candidates.begin(), candidates.end());

  Vec3 plane = Vec3::Zero();
  std::vector<double> weight(candidates.size(), 1.0);
  for (int round = 0; round < 3; ++round) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Vec3 atb = Vec3::Zero();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Vec3& p = points.positions[candidates[c]];
      const Vec3 row(p.x(), p.y(), 1.0);
      ata += weight[c] * row * row.transpose();
      atb += weight[c] * row * p.z();
    }
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
    if (!lu.isInvertible())
      throw NoGroundError("estimate_ground: degenerate candidate layout");
    plane = lu.solve(atb);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Vec3& p = points.positions[candidates[c]];
      const double r = (p.z() - (plane[0] * p.x() + plane[1] * p.y() + plane[2])) / z_tol;
      weight[c] = 1.0 / (1.0 + r * r);
    }
  }

  GroundEstimate ground;
  ground.cell = cell;
  ground.plane = plane;
  std::unordered_map<std::uint64_t, std::pair<double, std::size_t>> sums;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Vec3& p = points.positions[candidates[c]];
    const double predicted = plane[0] * p.x() + plane[1] * p.y() + plane[2];
    if (std::abs(p.z() - predicted) > z_tol) continue;
    ground.inliers.push_back(candidates[c]);
    auto& [sum, count] = sums[ground.cell_key(p.x(), p.y())];
    sum += p.z();
    ++count;
  }
  for (const auto& [key, sc] : sums)
    ground.cell_height[key] = sc.first / static_cast<double>(sc.second);
  return ground;
}

}  // namespace lidaraug
