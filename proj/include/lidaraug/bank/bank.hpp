#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/io.hpp"
#include "lidaraug/core/parallel.hpp"
#include "lidaraug/core/rng.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/bank/size_jitter.hpp"
#include "lidaraug/intensity/calibration.hpp"
#include "lidaraug/lidarize/lidarize.hpp"

namespace lidaraug {

/// One banked pseudo object: sensor-faithful points with intensity in box
/// frame, the box they fill (centered at the origin, yaw 0), and where the
/// sample came from.
struct ObjectBankEntry {
  std::string class_label;
  double heading_deg = 0.0;   // object yaw at lidarization time
  double range_m = 0.0;       // sensor distance at lidarization time
  PointCloud points;
  Box3D box;
  std::string source_id;
  bool front_flag = true;

  void validate(std::size_t min_points = 16) const {
    if (points.size() < min_points)
      throw ValidationError("bank entry " + source_id + ": only " +
                            std::to_string(points.size()) + " points");
    if (!points.has_intensity())
      throw ValidationError("bank entry " + source_id + ": missing intensity");
    box.validate();
    for (std::size_t i = 0; i < points.size(); ++i)
      if (!box.contains(points.positions[i], 1.01))
        throw ValidationError("bank entry " + source_id + ": point " +
                              std::to_string(i) + " outside the inflated box");
  }
};

struct BankSource {
  std::string source_id;
  std::string class_label;
  PointCloud dense;        // axis-aligned (major axis on x), rgb required
  bool front_flag = true;  // false: the model faces -x and is flipped first
};

inline std::vector<double> default_headings_deg() {
  std::vector<double> h;
  for (int d = -180; d <= 180; d += 30) h.push_back(d);
  return h;
}

inline std::vector<double> default_ranges_m() {
  std::vector<double> r;
  for (int m = 5; m <= 50; m += 5) r.push_back(m);
  return r;
}

struct BankGenConfig {
  std::vector<double> headings_deg = default_headings_deg();
  std::vector<double> ranges_m = default_ranges_m();
  SizeJitterConfig jitter = default_size_jitter();
  SensorConfig sensor;
  std::uint64_t seed = 0;
  std::size_t min_points = 16;
  int jobs = 1;
};

struct ObjectBank {
  std::vector<ObjectBankEntry> entries;
  std::size_t discarded = 0;      // tuples dropped by the min_points floor
  std::size_t min_points = 16;    // the floor the entries were built with
};

namespace detail {

/// Scale a cloud per axis so its bounding box matches `size`, recentered so
/// the bounding-box center sits at the origin.
inline PointCloud rescale_to_box(const PointCloud& cloud, const Vec3& size,
                                 const std::string& source_id) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : cloud.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = hi - lo;
  const char* axis_names = "xyz";
  for (int a = 0; a < 3; ++a)
    if (!(extent[a] > 1e-9))
      throw ValidationError("bank source " + source_id +
                            ": degenerate extent along " + axis_names[a]);
  const Vec3 mid = 0.5 * (lo + hi);
  PointCloud out = cloud;
  for (auto& p : out.positions)
    p = (p - mid).cwiseProduct(size.cwiseQuotient(extent));
  return out;
}

}  // namespace detail

/// Produce one bank entry candidate for a (source, heading, range) tuple,
/// or an empty optional when the min-point floor discards it.
inline std::optional<ObjectBankEntry> make_bank_entry(
    const BankSource& source, double heading_deg, double range_m,
    const IntensityCalibration& calibration, const BankGenConfig& config,
    std::uint64_t tuple_seed) {
  PointCloud dense = source.dense;
  if (!source.front_flag) {
    const Eigen::Matrix3d flip = yaw_rotation(M_PI);
    for (auto& p : dense.positions) p = flip * p;
  }

  const Vec3 size = determine_size(source.class_label, config.jitter, tuple_seed);
  dense = detail::rescale_to_box(dense, size, source.source_id);

  const double heading_rad = heading_deg * M_PI / 180.0;
  const Vec3 center_ego(range_m, 0.0, 0.5 * size.z());
  const Vec3 center_sensor = center_ego - config.sensor.sensor_origin;

  PointCloud sparse = lidarize_object(dense, center_sensor, heading_rad, config.sensor);
  sparse = estimate_intensity(sparse, calibration, source.class_label);
  sparse.rgb.clear();  // entries persist XYZI only

  ObjectBankEntry entry;
  entry.class_label = source.class_label;
  entry.heading_deg = heading_deg;
  entry.range_m = range_m;
  entry.box = Box3D{Vec3::Zero(), size, 0.0, source.class_label, std::nullopt};
  entry.source_id = source.source_id;
  entry.front_flag = source.front_flag;

  // Rearrangement can nudge silhouette points just past the box; the entry
  // contract is containment within the 1% inflation, so clip to it.
  for (std::size_t i = 0; i < sparse.size(); ++i)
    if (entry.box.contains(sparse.positions[i], 1.01))
      entry.points.append_from(sparse, i);

  if (entry.points.size() < config.min_points) return std::nullopt;
  return entry;
}

/// Lidarize every source over the heading/range grid. Deterministic for a
/// fixed config seed regardless of jobs: tuple seeds are derived by index
/// mixing and results land in per-tuple slots before the final ordering
/// pass (sort by class, source_id, heading, range).
inline ObjectBank generate_bank(const std::vector<BankSource>& sources,
                                const IntensityCalibration& calibration,
                                const BankGenConfig& config = {}) {
  if (sources.empty()) throw ValidationError("generate_bank: no sources");
  if (config.headings_deg.empty())
    throw ValidationError("generate_bank: empty heading list");
  if (config.ranges_m.empty()) throw ValidationError("generate_bank: empty range list");
  config.sensor.validate();
  config.jitter.validate();

  const std::size_t n_tuples =
      sources.size() * config.headings_deg.size() * config.ranges_m.size();
  std::vector<std::optional<ObjectBankEntry>> slots(n_tuples);

  parallel_for(n_tuples, config.jobs, [&](std::size_t t) {
    const std::size_t per_source = config.headings_deg.size() * config.ranges_m.size();
    const std::size_t s = t / per_source;
    const std::size_t h = (t % per_source) / config.ranges_m.size();
    const std::size_t r = t % config.ranges_m.size();
    const std::uint64_t tuple_seed = Rng::mix(config.seed, s, h, r);
    slots[t] = make_bank_entry(sources[s], config.headings_deg[h], config.ranges_m[r],
                               calibration, config, tuple_seed);
  });

  ObjectBank bank;
  bank.min_points = config.min_points;
  for (auto& slot : slots) {
    if (slot.has_value())
      bank.entries.push_back(std::move(*slot));
    else
      ++bank.discarded;
  }
  std::stable_sort(bank.entries.begin(), bank.entries.end(),
                   [](const ObjectBankEntry& a, const ObjectBankEntry& b) {
                     if (a.class_label != b.class_label)
                       return a.class_label < b.class_label;
                     if (a.source_id != b.source_id) return a.source_id < b.source_id;
                     if (a.heading_deg != b.heading_deg)
                       return a.heading_deg < b.heading_deg;
                     return a.range_m < b.range_m;
                   });
  return bank;
}

// ---------------------------------------------------------------------------
// On-disk layout: <root>/manifest, <root>/boxes, <root>/entries/NNNNNN.bin.
// The manifest row order matches the boxes file and entry numbering.

inline void write_bank(const ObjectBank& bank, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "entries");

  std::ofstream manifest(root / "manifest");
  if (!manifest)
    throw FormatError("cannot open file for writing: " + (root / "manifest").string());
  manifest << "# class source_id heading_deg range_m n_points path front_flag\n";
  manifest << "# min_points " << bank.min_points << "\n";
  manifest << std::setprecision(std::numeric_limits<double>::max_digits10);

  std::vector<Box3D> boxes;
  boxes.reserve(bank.entries.size());
  for (std::size_t i = 0; i < bank.entries.size(); ++i) {
    const ObjectBankEntry& e = bank.entries[i];
    std::ostringstream name;
    name << "entries/" << std::setw(6) << std::setfill('0') << i << ".bin";
    write_lidar_bin(e.points, PointLayout::XYZI, root / name.str());
    manifest << e.class_label << ' ' << e.source_id << ' ' << e.heading_deg << ' '
             << e.range_m << ' ' << e.points.size() << ' ' << name.str() << ' '
             << (e.front_flag ? 1 : 0) << '\n';
    boxes.push_back(e.box);
  }
  write_boxes(boxes, root / "boxes");
}

inline ObjectBank read_bank(const std::filesystem::path& root,
                            std::size_t min_points = 16) {
  std::ifstream manifest(root / "manifest");
  if (!manifest) throw FormatError("cannot open file: " + (root / "manifest").string());
  const std::vector<Box3D> boxes = read_boxes(root / "boxes");

  ObjectBank bank;
  bank.min_points = min_points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.rfind("# min_points ", 0) == 0) {
      std::istringstream hs(line.substr(13));
      if (hs >> bank.min_points) min_points = bank.min_points;
    }
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    ObjectBankEntry entry;
    std::string rel_path;
    std::size_t n_points = 0;
    int front = 1;
    if (!(ls >> entry.class_label)) continue;
    if (!(ls >> entry.source_id >> entry.heading_deg >> entry.range_m >> n_points >>
          rel_path >> front))
      throw FormatError((root / "manifest").string() + ": malformed row at line " +
                        std::to_string(line_no));
    entry.front_flag = front != 0;
    entry.points = read_lidar_bin(root / rel_path, PointLayout::XYZI);
    if (entry.points.size() != n_points)
      throw FormatError((root / rel_path).string() + ": point count " +
                        std::to_string(entry.points.size()) + " != manifest " +
                        std::to_string(n_points));
    if (bank.entries.size() >= boxes.size())
      throw FormatError((root / "boxes").string() + ": fewer boxes than manifest rows");
    entry.box = boxes[bank.entries.size()];
    entry.validate(min_points);
    bank.entries.push_back(std::move(entry));
  }
  if (bank.entries.size() != boxes.size())
    throw FormatError((root / "boxes").string() + ": box count " +
                      std::to_string(boxes.size()) + " != manifest rows " +
                      std::to_string(bank.entries.size()));
  return bank;
}

}  // namespace lidaraug
