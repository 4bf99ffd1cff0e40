#pragma once

#include <cstddef>
#include <string>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/rng.hpp"

namespace lidaraug {

/// GT : pseudo-GT mixing weights, e.g. parse_mix_ratio("1:1").
struct MixRatio {
  double gt = 1.0;
  double pgt = 1.0;

  double gt_probability() const { return gt / (gt + pgt); }

  void validate() const {
    if (gt < 0.0 || pgt < 0.0)
      throw ValidationError("mix ratio parts must be non-negative");
    if (gt + pgt <= 0.0) throw ValidationError("mix ratio must not be 0:0");
  }
};

inline MixRatio parse_mix_ratio(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw FormatError("mix ratio must look like '1:1', got '" + text + "'");
  MixRatio ratio;
  try {
    ratio.gt = std::stod(text.substr(0, colon));
    ratio.pgt = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw FormatError("mix ratio must look like '1:1', got '" + text + "'");
  }
  ratio.validate();
  return ratio;
}

/// A draw from the union of a real GT database and a pseudo bank.
struct MixedDraw {
  bool from_gt = false;
  std::size_t index = 0;
};

/// Pick GT with probability gt/(gt+pgt), then uniformly within the chosen
/// source. A side with zero probability may be empty.
inline MixedDraw sample_mixed(std::size_t gt_count, std::size_t bank_count,
                              const MixRatio& ratio, Rng& rng) {
  ratio.validate();
  if (gt_count == 0 && bank_count == 0)
    throw ValidationError("sample_mixed: both sources empty");
  const double p_gt = ratio.gt_probability();
  if (gt_count == 0 && p_gt > 0.0)
    throw ValidationError("sample_mixed: GT side empty but ratio gives it mass");
  if (bank_count == 0 && p_gt < 1.0)
    throw ValidationError("sample_mixed: bank side empty but ratio gives it mass");

  MixedDraw draw;
  draw.from_gt = rng.uniform01() < p_gt;
  draw.index = rng.uniform_index(draw.from_gt ? gt_count : bank_count);
  return draw;
}

}  // namespace lidaraug
