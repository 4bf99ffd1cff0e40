#pragma once

#include <algorithm>
#include <map>
#include <string>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/rng.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Per-class mean extents with relative Gaussian scale jitter. sigma is the
/// standard deviation of the per-dimension scale noise, truncated at
/// clip_sigmas standard deviations.
struct SizeJitterConfig {
  std::map<std::string, Vec3> class_mean_size;
  double sigma = 0.1;
  double clip_sigmas = 1.0;

  void validate() const {
    if (sigma <= 0.0) throw ValidationError("SizeJitterConfig: sigma must be > 0");
    if (clip_sigmas <= 0.0)
      throw ValidationError("SizeJitterConfig: clip must be > 0");
  }
};

/// Mean object extents for the common traffic classes, meters.
inline SizeJitterConfig default_size_jitter() {
  SizeJitterConfig config;
  config.class_mean_size = {
      {"car", {4.63, 1.97, 1.74}},
      {"truck", {6.93, 2.51, 2.84}},
      {"bus", {11.00, 2.90, 3.50}},
      {"trailer", {12.29, 2.90, 3.87}},
      {"construction_vehicle", {6.37, 2.85, 3.19}},
      {"motorcycle", {2.11, 0.77, 1.47}},
      {"bicycle", {1.70, 0.60, 1.30}},
  };
  return config;
}

/// Draw a jittered size for a class: each dimension is scaled by (1 + e)
/// with e ~ N(0, sigma^2) clipped to [-clip_sigmas*sigma, +clip_sigmas*sigma].
/// Deterministic for a fixed seed.
inline Vec3 determine_size(const std::string& class_label,
                           const SizeJitterConfig& config, std::uint64_t seed) {
  config.validate();
  const auto it = config.class_mean_size.find(class_label);
  if (it == config.class_mean_size.end())
    throw ValidationError("determine_size: unknown class " + class_label);
  Rng rng(seed);
  const double bound = config.clip_sigmas * config.sigma;
  Vec3 size;
  for (int a = 0; a < 3; ++a) {
    const double eps = std::clamp(rng.gaussian() * config.sigma, -bound, bound);
    size[a] = it->second[a] * (1.0 + eps);
  }
  return size;
}

}  // namespace lidaraug
