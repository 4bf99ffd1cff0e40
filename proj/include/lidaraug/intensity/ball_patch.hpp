#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/intensity/fps.hpp"

namespace lidaraug {

struct BallPatch {
  Vec3 center = Vec3::Zero();
  std::vector<std::size_t> members;
  double mean_intensity = 0.0;  // meaningful only when the source has intensity
  Vec3 mean_rgb = Vec3::Zero();  // meaningful only when the source has rgb
};

/// Equal-count grouping of a cloud: N FPS centers, every point assigned to
/// its nearest center (ties to the lowest center index). The patches
/// partition the cloud.
struct BallPatchSet {
  std::vector<BallPatch> patches;

  std::size_t size() const { return patches.size(); }
};

inline BallPatchSet build_ball_patches(const PointCloud& cloud, std::size_t n_patches) {
  if (n_patches < 1) throw ValidationError("build_ball_patches: N must be >= 1");
  if (cloud.size() < n_patches)
    throw ValidationError("build_ball_patches: cloud has " +
                          std::to_string(cloud.size()) + " points, need >= " +
                          std::to_string(n_patches));

  const auto centers = farthest_point_sample(cloud, n_patches);
  BallPatchSet set;
  set.patches.resize(n_patches);
  for (std::size_t c = 0; c < n_patches; ++c)
    set.patches[c].center = cloud.positions[centers[c]];

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_patches; ++c) {
      const double d = (cloud.positions[i] - set.patches[c].center).squaredNorm();
      if (d < best) {
        best = d;
        nearest = c;
      }
    }
    set.patches[nearest].members.push_back(i);
  }

  for (auto& patch : set.patches) {
    if (patch.members.empty()) continue;
    if (cloud.has_intensity()) {
      double sum = 0.0;
      for (std::size_t i : patch.members) sum += cloud.intensity[i];
      patch.mean_intensity = sum / static_cast<double>(patch.members.size());
    }
    if (cloud.has_rgb()) {
      Vec3 sum = Vec3::Zero();
      for (std::size_t i : patch.members) sum += cloud.rgb[i];
      patch.mean_rgb = sum / static_cast<double>(patch.members.size());
    }
  }
  return set;
}

}  // namespace lidaraug
