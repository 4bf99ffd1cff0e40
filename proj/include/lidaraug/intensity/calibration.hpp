#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/intensity/ball_patch.hpp"
#include "lidaraug/intensity/fps.hpp"
#include "lidaraug/intensity/hungarian.hpp"

namespace lidaraug {

/// Intensity histogram over [0,1]. mass sums to 1; bin_value holds the
/// representative value emitted for a bin during histogram matching: the
/// mean of the training samples that fell into it (bin center when empty).
struct IntensityHistogram {
  std::vector<double> mass;
  std::vector<double> bin_value;

  std::size_t bins() const { return mass.size(); }

  static std::size_t bin_of(double v, std::size_t bins) {
    const auto b = static_cast<long>(std::floor(v * static_cast<double>(bins)));
    return static_cast<std::size_t>(std::clamp(b, 0L, static_cast<long>(bins) - 1));
  }

  static IntensityHistogram fit(const std::vector<double>& samples, std::size_t bins) {
    IntensityHistogram h;
    h.mass.assign(bins, 0.0);
    h.bin_value.assign(bins, 0.0);
    std::vector<std::size_t> counts(bins, 0);
    std::vector<double> sums(bins, 0.0);
    for (double v : samples) {
      const std::size_t b = bin_of(v, bins);
      ++counts[b];
      sums[b] += v;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      h.mass[b] = samples.empty()
                      ? 0.0
                      : static_cast<double>(counts[b]) / static_cast<double>(samples.size());
      h.bin_value[b] = counts[b] > 0 ? sums[b] / static_cast<double>(counts[b])
                                     : (b + 0.5) / static_cast<double>(bins);
    }
    return h;
  }

  /// Value at quantile q via the inverse CDF (first bin whose cumulative
  /// mass reaches q).
  double value_at_quantile(double q) const {
    double cum = 0.0;
    for (std::size_t b = 0; b < bins(); ++b) {
      cum += mass[b];
      if (cum >= q) return bin_value[b];
    }
    return bin_value[bins() - 1];
  }

  void validate() const {
    if (mass.empty()) throw ValidationError("IntensityHistogram: no bins");
    if (bin_value.size() != mass.size())
      throw ValidationError("IntensityHistogram: bin_value length mismatch");
    double sum = 0.0;
    for (double m : mass) {
      if (m < 0.0) throw ValidationError("IntensityHistogram: negative mass");
      sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("IntensityHistogram: mass sums to " + std::to_string(sum));
  }
};

struct RgbIntensityExemplar {
  Vec3 rgb = Vec3::Zero();
  double intensity = 0.0;
};

struct ClassCalibration {
  std::vector<RgbIntensityExemplar> exemplars;
  IntensityHistogram histogram;
};

/// Deterministic rgb -> intensity estimator state: per-class exemplar
/// tables plus the class intensity histogram the estimates are matched to.
struct IntensityCalibration {
  std::size_t k = 4;
  std::size_t bins = 64;
  std::map<std::string, ClassCalibration> classes;
};

/// One training pair: a colored cloud and a real cloud with intensity,
/// both showing the same object class (the clouds are not point-paired).
struct SamplePair {
  PointCloud fake;  // rgb channel required
  PointCloud real;  // intensity channel required
};

struct CalibrationFitOptions {
  std::size_t min_points = 256;  // pairs with a smaller cloud are excluded
  std::size_t max_pairs = 300;   // per-class cap, applied after filtering
  std::size_t fps_points = 256;  // resample size before grouping
  std::size_t patches = 16;      // ball patches per cloud
};

/// Build a calibration from per-class sample pairs. For each surviving
/// pair both clouds are FPS-resampled, grouped into ball patches, and the
/// patch centers matched by minimum L1 cost; every matched pair of patches
/// contributes one (mean rgb, mean intensity) exemplar. The class target
/// histogram is fit over all real intensities of the surviving pairs.
inline IntensityCalibration fit_calibration(
    const std::map<std::string, std::vector<SamplePair>>& samples_by_class,
    std::size_t k = 4, std::size_t bins = 64,
    const CalibrationFitOptions& options = {}) {
  if (k < 1) throw ValidationError("fit_calibration: k must be >= 1");
  if (bins < 1) throw ValidationError("fit_calibration: bins must be >= 1");

  IntensityCalibration calibration;
  calibration.k = k;
  calibration.bins = bins;

  for (const auto& [class_label, pairs] : samples_by_class) {
    ClassCalibration cc;
    std::vector<double> real_intensities;
    std::size_t used = 0;
    for (const auto& pair : pairs) {
      if (used >= options.max_pairs) break;
      if (pair.fake.size() < options.min_points ||
          pair.real.size() < options.min_points)
        continue;
      if (!pair.fake.has_rgb())
        throw ValidationError("fit_calibration: fake sample of class " + class_label +
                              " lacks rgb");
      if (!pair.real.has_intensity())
        throw ValidationError("fit_calibration: real sample of class " + class_label +
                              " lacks intensity");
      ++used;

      const PointCloud fake = fps_resample(pair.fake, std::min(options.fps_points,
                                                               pair.fake.size()));
      const PointCloud real = fps_resample(pair.real, std::min(options.fps_points,
                                                               pair.real.size()));
      const BallPatchSet fake_patches = build_ball_patches(fake, options.patches);
      const BallPatchSet real_patches = build_ball_patches(real, options.patches);

      std::vector<Vec3> ca(options.patches), cb(options.patches);
      for (std::size_t i = 0; i < options.patches; ++i) {
        ca[i] = fake_patches.patches[i].center;
        cb[i] = real_patches.patches[i].center;
      }
      const Assignment match = hungarian_match(ca, cb);
      for (std::size_t i = 0; i < options.patches; ++i)
        cc.exemplars.push_back({fake_patches.patches[i].mean_rgb,
                                real_patches.patches[match.target_of[i]].mean_intensity});

      for (double v : pair.real.intensity) real_intensities.push_back(v);
    }
    if (cc.exemplars.empty())
      throw ValidationError("fit_calibration: class " + class_label +
                            " has no usable sample pairs");
    cc.histogram = IntensityHistogram::fit(real_intensities, bins);
    calibration.classes.emplace(class_label, std::move(cc));
  }
  if (calibration.classes.empty())
    throw ValidationError("fit_calibration: no classes given");
  return calibration;
}

namespace detail {

/// Mean intensity of the k exemplars nearest to `rgb`; distance ties break
/// to the lower exemplar index.
inline double knn_intensity(const std::vector<RgbIntensityExemplar>& exemplars,
                            const Vec3& rgb, std::size_t k) {
  const std::size_t kk = std::min(k, exemplars.size());
  // Sorted scratch of the current k best (distance ascending, then index).
  std::vector<std::pair<double, std::size_t>> best;
  best.reserve(kk + 1);
  for (std::size_t e = 0; e < exemplars.size(); ++e) {
    const double d = (exemplars[e].rgb - rgb).squaredNorm();
    if (best.size() == kk && d >= best.back().first) continue;
    const auto pos = std::upper_bound(
        best.begin(), best.end(), std::make_pair(d, std::numeric_limits<std::size_t>::max()));
    best.insert(pos, {d, e});
    if (best.size() > kk) best.pop_back();
  }
  double sum = 0.0;
  for (const auto& [d, e] : best) sum += exemplars[e].intensity;
  return sum / static_cast<double>(best.size());
}

}  // namespace detail

/// Estimate per-point intensities for a colored cloud: raw value = mean of
/// the k nearest exemplars in rgb space, then the raws are rank-mapped onto
/// the class target histogram (point with ascending-rank p out of n takes
/// the target value at quantile (p+0.5)/n; raw ties rank by point index).
/// Bit-deterministic for fixed inputs.
inline PointCloud estimate_intensity(const PointCloud& cloud,
                                     const IntensityCalibration& calibration,
                                     const std::string& class_label) {
  const auto it = calibration.classes.find(class_label);
  if (it == calibration.classes.end())
    throw ValidationError("estimate_intensity: unknown class " + class_label);
  if (!cloud.has_rgb() && !cloud.empty())
    throw ValidationError("estimate_intensity: cloud lacks rgb");

  PointCloud out = cloud;
  out.intensity.assign(cloud.size(), 0.0);
  if (cloud.empty()) return out;

  const ClassCalibration& cc = it->second;
  std::vector<double> raw(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    raw[i] = detail::knn_intensity(cc.exemplars, cloud.rgb[i], calibration.k);

  std::vector<std::size_t> order(cloud.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw[a] != raw[b] ? raw[a] < raw[b] : a < b;
  });

  const double n = static_cast<double>(cloud.size());
  for (std::size_t p = 0; p < order.size(); ++p)
    out.intensity[order[p]] = cc.histogram.value_at_quantile((p + 0.5) / n);
  return out;
}

// ---------------------------------------------------------------------------
// Text persistence. Layout:
//   k <k>
//   bins <B>
//   exemplar <class> <r> <g> <b> <intensity>     (one line each)
//   hist <class> <bin> <mass> <value>            (all B bins per class)

inline void write_calibration(const IntensityCalibration& calibration,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "k " << calibration.k << "\n";
  out << "bins " << calibration.bins << "\n";
  for (const auto& [class_label, cc] : calibration.classes) {
    for (const auto& ex : cc.exemplars)
      out << "exemplar " << class_label << ' ' << ex.rgb.x() << ' ' << ex.rgb.y() << ' '
          << ex.rgb.z() << ' ' << ex.intensity << '\n';
    for (std::size_t b = 0; b < cc.histogram.bins(); ++b)
      out << "hist " << class_label << ' ' << b << ' ' << cc.histogram.mass[b] << ' '
          << cc.histogram.bin_value[b] << '\n';
  }
}

inline IntensityCalibration read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path.string());
  IntensityCalibration calibration;
  std::string line;
  std::size_t line_no = 0;
  bool have_k = false, have_bins = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (tag == "k") {
      if (!(ls >> calibration.k)) throw FormatError(where + ": malformed k");
      have_k = true;
    } else if (tag == "bins") {
      if (!(ls >> calibration.bins)) throw FormatError(where + ": malformed bins");
      have_bins = true;
    } else if (tag == "exemplar") {
      std::string class_label;
      RgbIntensityExemplar ex;
      if (!(ls >> class_label >> ex.rgb.x() >> ex.rgb.y() >> ex.rgb.z() >> ex.intensity))
        throw FormatError(where + ": malformed exemplar");
      calibration.classes[class_label].exemplars.push_back(ex);
    } else if (tag == "hist") {
      std::string class_label;
      std::size_t bin;
      double mass, value;
      if (!(ls >> class_label >> bin >> mass >> value))
        throw FormatError(where + ": malformed hist line");
      auto& h = calibration.classes[class_label].histogram;
      if (h.mass.size() < bin + 1) {
        h.mass.resize(bin + 1, 0.0);
        h.bin_value.resize(bin + 1, 0.0);
      }
      h.mass[bin] = mass;
      h.bin_value[bin] = value;
    } else {
      throw FormatError(where + ": unknown tag " + tag);
    }
  }
  if (!have_k || !have_bins)
    throw FormatError(path.string() + ": missing k/bins header");
  for (const auto& [class_label, cc] : calibration.classes) {
    if (cc.exemplars.empty())
      throw FormatError(path.string() + ": class " + class_label + " has no exemplars");
    if (cc.histogram.bins() != calibration.bins)
      throw FormatError(path.string() + ": class " + class_label +
                        " histogram bin count mismatch");
    cc.histogram.validate();
  }
  return calibration;
}

}  // namespace lidaraug
