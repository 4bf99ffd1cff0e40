#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/intensity/ball_patch.hpp"
#include "lidaraug/intensity/hungarian.hpp"

namespace lidaraug {

/// Group intensity distance between two clouds: both are grouped into
/// n_patches ball patches, patch centers are matched by minimum L1 cost,
/// and the result is lambda times the summed absolute difference of the
/// matched patches' mean intensities.
inline double group_intensity_distance(const PointCloud& fake, const PointCloud& real,
                                       std::size_t n_patches, double lambda = 0.1) {
  if (!fake.has_intensity() || !real.has_intensity())
    throw ValidationError("group_intensity_distance: both clouds need intensity");

  const BallPatchSet a = build_ball_patches(fake, n_patches);
  const BallPatchSet b = build_ball_patches(real, n_patches);

  std::vector<Vec3> centers_a(n_patches), centers_b(n_patches);
  for (std::size_t i = 0; i < n_patches; ++i) {
    centers_a[i] = a.patches[i].center;
    centers_b[i] = b.patches[i].center;
  }
  const Assignment match = hungarian_match(centers_a, centers_b);

  double sum = 0.0;
  for (std::size_t i = 0; i < n_patches; ++i)
    sum += std::abs(a.patches[i].mean_intensity -
                    b.patches[match.target_of[i]].mean_intensity);
  return lambda * sum;
}

}  // namespace lidaraug
