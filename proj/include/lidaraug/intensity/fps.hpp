#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Farthest point sampling over positions. The seed is the point farthest
/// from the centroid; each subsequent pick maximizes the minimum distance
/// to the already chosen set. All ties break to the lowest index, so the
/// result is deterministic.
inline std::vector<std::size_t> farthest_point_sample(const PointCloud& cloud,
                                                      std::size_t m) {
  if (cloud.empty()) throw ValidationError("farthest_point_sample: empty cloud");
  if (m < 1) throw ValidationError("farthest_point_sample: m must be >= 1");
  if (m > cloud.size())
    throw ValidationError("farthest_point_sample: m = " + std::to_string(m) +
                          " exceeds point count " + std::to_string(cloud.size()));

  const std::size_t n = cloud.size();
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cloud.positions) centroid += p;
  centroid /= static_cast<double>(n);

  std::size_t seed = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (cloud.positions[i] - centroid).squaredNorm();
    if (d > best) {
      best = d;
      seed = i;
    }
  }

  std::vector<std::size_t> chosen{seed};
  std::vector<double> min_dist(n);
  for (std::size_t i = 0; i < n; ++i)
    min_dist[i] = (cloud.positions[i] - cloud.positions[seed]).squaredNorm();

  while (chosen.size() < m) {
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_dist[i] > far) {
        far = min_dist[i];
        next = i;
      }
    }
    chosen.push_back(next);
    for (std::size_t i = 0; i < n; ++i)
      min_dist[i] =
          std::min(min_dist[i], (cloud.positions[i] - cloud.positions[next]).squaredNorm());
  }
  return chosen;
}

/// Convenience: new cloud holding the m sampled points (channels carried).
inline PointCloud fps_resample(const PointCloud& cloud, std::size_t m) {
  const auto idx = farthest_point_sample(cloud, m);
  PointCloud out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.append_from(cloud, i);
  return out;
}

}  // namespace lidaraug
