// Release gate: thirteen independent checks over the toolkit, one printed
// line each, nonzero exit when any fails. Expected values are derived away
// from the library: closed forms, exhaustive search, or a reference loop
// rewritten from scratch. Tolerances are pinned next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/lidaraug.hpp"

using namespace lidaraug;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& message) {
  o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += message;
}

void expect(Outcome& o, bool condition, const std::string& message) {
  if (!condition) fail(o, message);
}

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Lattice constants of the rearranged range view.

Outcome lattice_constants() {
  Outcome o;
  const SensorConfig cfg;  // 32 rows, 1080 columns, +10 / -30 degrees
  // Hand evaluation in degrees: (1 - 0.5/32) * 40 - 30 and
  // (1 - 31.5/32) * 40 - 30.
  const double phi_top = rearranged_inclination(0, cfg) * 180.0 / M_PI;
  const double phi_bottom = rearranged_inclination(31, cfg) * 180.0 / M_PI;
  expect(o, std::abs(phi_top - 9.375) < 1e-9, "phi'(0) deg = " + num(phi_top));
  expect(o, std::abs(phi_bottom + 29.375) < 1e-9, "phi'(31) deg = " + num(phi_bottom));
  // pi * (2 * 0.5 / 1080 - 1), evaluated with 30 digit decimal arithmetic
  // and frozen: -3.13868377150313602250...
  const double theta0 = rearranged_azimuth(0, cfg);
  expect(o, std::abs(theta0 - (-3.138683771503136)) < 1e-9,
         "theta'(0) = " + num(theta0));
  return o;
}

// ---------------------------------------------------------------------------
// 2. Range view keeps exactly the nearest return per cell.

Outcome range_view_filtering() {
  Outcome o;
  const SensorConfig cfg;
  const double up = cfg.fov_up_rad(), down = cfg.fov_down_rad();
  Rng rng(2026);
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    PointCloud cloud;
    const std::size_t n = 300 + rng.uniform_index(200);
    for (std::size_t i = 0; i < n; ++i)
      cloud.positions.push_back(spherical_to_cart(rng.uniform(2.0, 60.0),
                                                  rng.uniform(-M_PI, M_PI),
                                                  rng.uniform(-down, up)));

    const RangeImage image = project_to_range(cloud, cfg);

    // Independent binning pass: min range and its index per cell.
    std::map<long, std::pair<double, std::size_t>> best;
    for (std::size_t i = 0; i < cloud.positions.size(); ++i) {
      const Vec3& p = cloud.positions[i];
      const double r = p.norm();
      double theta = std::atan2(p.y(), p.x());
      if (theta <= -M_PI) theta = M_PI;
      const double phi = std::asin(std::clamp(p.z() / r, -1.0, 1.0));
      if (phi > up || phi < -down) continue;
      long u = static_cast<long>(
          std::floor(cfg.azimuth_resolution * (theta / M_PI + 1.0) / 2.0));
      u %= cfg.azimuth_resolution;
      if (u < 0) u += cfg.azimuth_resolution;
      long v = static_cast<long>(
          std::floor(cfg.channels * (1.0 - (phi + down) / (up + down))));
      v = std::clamp(v, 0L, static_cast<long>(cfg.channels - 1));
      const long cell = v * cfg.azimuth_resolution + u;
      const auto it = best.find(cell);
      if (it == best.end() || r < it->second.first) best[cell] = {r, i};
    }

    std::size_t occupied = 0;
    for (int v = 0; v < cfg.channels && o.pass; ++v)
      for (int u = 0; u < cfg.azimuth_resolution; ++u) {
        const RangeCell& cell = image.at(v, u);
        if (!cell.occupied()) continue;
        ++occupied;
        const auto it = best.find(static_cast<long>(v) * cfg.azimuth_resolution + u);
        if (it == best.end()) {
          fail(o, "trial " + std::to_string(trial) + ": cell occupied only in library");
          break;
        }
        if (cell.depth != it->second.first || cell.source != it->second.second) {
          fail(o, "trial " + std::to_string(trial) + ": cell winner mismatch");
          break;
        }
      }
    expect(o, occupied == best.size(),
           "trial " + std::to_string(trial) + ": occupied cell count " +
               std::to_string(occupied) + " vs oracle " + std::to_string(best.size()));
    const PointCloud filtered = rearrange(image);
    expect(o, filtered.size() == occupied,
           "trial " + std::to_string(trial) + ": filtered size " +
               std::to_string(filtered.size()) + " vs occupied " +
               std::to_string(occupied));
  }
  return o;
}

// ---------------------------------------------------------------------------
// 3. Assignment solver against exhaustive permutation search.

Outcome assignment_oracle() {
  Outcome o;
  Rng rng(3);
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    // Integer costs keep every sum exact, so equality can be literal.
    for (auto& row : cost)
      for (auto& c : row) c = static_cast<double>(rng.uniform_index(100));

    const Assignment got = solve_assignment(cost);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double optimum = std::numeric_limits<double>::infinity();
    do {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += cost[i][perm[i]];
      optimum = std::min(optimum, s);
    } while (std::next_permutation(perm.begin(), perm.end()));

    expect(o, got.total_cost == optimum,
           "trial " + std::to_string(trial) + ": cost " + num(got.total_cost) +
               " vs optimum " + num(optimum));
    std::set<std::size_t> seen(got.target_of.begin(), got.target_of.end());
    expect(o, seen.size() == n, "trial " + std::to_string(trial) + ": not a permutation");
    double recomputed = 0.0;
    for (std::size_t i = 0; i < n; ++i) recomputed += cost[i][got.target_of[i]];
    expect(o, recomputed == got.total_cost,
           "trial " + std::to_string(trial) + ": reported cost is not the pairing cost");
  }
  return o;
}

// ---------------------------------------------------------------------------
// 4. Group intensity distance: zero on self, hand value, linear weight.

Outcome group_distance_scaling() {
  Outcome o;
  // Two spatial clusters with constant intensities; both clouds share the
  // exact same geometry so the patch matching is the identity.
  auto two_cluster = [](double intensity_lo, double intensity_hi) {
    PointCloud cloud;
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
      const bool high = i % 2 != 0;
      cloud.positions.push_back(
          Vec3(high ? 10.0 : 0.0, rng.uniform01() * 0.2, rng.uniform01() * 0.2));
      cloud.intensity.push_back(high ? intensity_hi : intensity_lo);
    }
    return cloud;
  };
  const PointCloud a = two_cluster(0.2, 0.4);
  const PointCloud b = two_cluster(0.3, 0.5);

  const double self = group_intensity_distance(a, a, 2);
  expect(o, self == 0.0, "self distance " + num(self));

  // Both matched patches differ by 0.1 in mean intensity, so the distance
  // is 0.1 * (0.1 + 0.1) = 0.02.
  const double d = group_intensity_distance(a, b, 2, 0.1);
  expect(o, std::abs(d - 0.02) < 1e-12, "two patch value " + num(d));

  const double base = group_intensity_distance(a, b, 2, 1.0);
  for (const double lambda : {0.05, 0.2, 0.7, 1.3}) {
    const double scaled = group_intensity_distance(a, b, 2, lambda);
    expect(o, std::abs(scaled - lambda * base) < 1e-12,
           "lambda " + num(lambda) + " breaks linearity: " + num(scaled));
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5. Raster geometry and fusion against a per-pixel rule.

Outcome raster_geometry_and_fusion() {
  Outcome o;
  const int side = FeasibilityRaster::make(51.2, 0.128).size();
  expect(o, side == 800, "default raster side " + std::to_string(side));

  Rng rng(55);
  auto random_bits = [&]() {
    FeasibilityRaster raster = FeasibilityRaster::make(3.2, 0.2);  // 32 x 32
    for (auto& c : raster.cells) c = rng.uniform01() < 0.5 ? 1 : 0;
    return raster;
  };
  for (int trial = 0; trial < 100 && o.pass; ++trial) {
    const FeasibilityRaster map_bits = random_bits();
    const FeasibilityRaster observed = random_bits();
    const FeasibilityRaster ground_bits = random_bits();
    const FeasibilityRaster fused = fuse_feasibility(map_bits, observed, ground_bits);
    expect(o, fused.size() == 32, "fused side " + std::to_string(fused.size()));
    for (std::size_t i = 0; i < fused.cells.size(); ++i) {
      const std::uint8_t want = observed.cells[i] ? ground_bits.cells[i] : map_bits.cells[i];
      if (fused.cells[i] != want) {
        fail(o, "trial " + std::to_string(trial) + ": pixel " + std::to_string(i) +
                    " fused to " + std::to_string(fused.cells[i]));
        break;
      }
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// 6. Placement never leaves the feasible mask and never overlaps in BEV.

ObjectBankEntry synthetic_entry(std::uint64_t seed, const Vec3& size) {
  ObjectBankEntry entry;
  entry.class_label = "car";
  entry.source_id = "synthetic_" + std::to_string(seed);
  Rng rng(seed);
  for (int i = 0; i < 150; ++i) {
    entry.points.positions.push_back(Vec3(size.x() * (rng.uniform01() - 0.5),
                                          size.y() * (rng.uniform01() - 0.5),
                                          size.z() * (rng.uniform01() - 0.5)));
    entry.points.intensity.push_back(0.25);
  }
  entry.box.center = Vec3::Zero();
  entry.box.size = size;
  entry.box.yaw = 0.0;
  entry.box.class_label = "car";
  return entry;
}

LidarFrame flat_scene(std::uint64_t seed, int n) {
  LidarFrame frame;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    frame.points.positions.push_back(Vec3(rng.uniform(-35.0, 35.0),
                                          rng.uniform(-35.0, 35.0),
                                          0.02 * rng.gaussian()));
    frame.points.intensity.push_back(0.9);
  }
  return frame;
}

Outcome collision_free_placement() {
  Outcome o;
  std::vector<ObjectBankEntry> store;
  for (std::uint64_t i = 0; i < 5; ++i)
    store.push_back(synthetic_entry(100 + i, Vec3(4.2, 1.8, 1.6)));
  std::vector<const ObjectBankEntry*> entries;
  for (const auto& e : store) entries.push_back(&e);

  std::size_t total_inserted = 0;
  Rng seeds(66);
  for (int trial = 0; trial < 100 && o.pass; ++trial) {
    LidarFrame frame = flat_scene(seeds.next_u64(), 2500);
    Box3D original;
    original.center = Vec3(8.0, -6.0, 0.8);
    original.size = Vec3(4.2, 1.8, 1.6);
    original.yaw = 0.4;
    original.class_label = "car";
    frame.boxes.push_back(original);

    const GroundEstimate ground = estimate_ground(frame);
    const FeasibilityRaster prior = FeasibilityRaster::make(51.2, 0.128, Vec2::Zero(), 1);
    const FeasibilityRaster feasibility = fuse_feasibility(prior, ground, frame);

    PlacementOptions options;
    options.seed = seeds.next_u64();
    PlacementReport report;
    const LidarFrame out = place_objects(frame, entries, feasibility, ground, options,
                                         &report);
    total_inserted += report.inserted_count();

    for (const auto& outcome : report.outcomes) {
      if (!outcome.inserted) continue;
      int px = 0, py = 0;
      const bool inside = feasibility.world_to_pixel(outcome.box.center.x(),
                                                     outcome.box.center.y(), px, py);
      if (!inside || feasibility.at(px, py) != 1) {
        fail(o, "trial " + std::to_string(trial) + ": center on infeasible pixel");
        break;
      }
    }
    for (std::size_t i = frame.boxes.size(); i < out.boxes.size() && o.pass; ++i)
      for (std::size_t j = 0; j < out.boxes.size(); ++j) {
        if (j == i) continue;
        const double iou = bev_iou(out.boxes[i], out.boxes[j]);
        if (iou != 0.0) {
          fail(o, "trial " + std::to_string(trial) + ": BEV IoU " + num(iou));
          break;
        }
      }
  }
  // A safety property proved on zero insertions would be vacuous.
  expect(o, total_inserted >= 100,
         "only " + std::to_string(total_inserted) + " insertions over 100 scenes");

  LidarFrame frame = flat_scene(424242, 2500);
  const GroundEstimate ground = estimate_ground(frame);
  const FeasibilityRaster dead = FeasibilityRaster::make(51.2, 0.128, Vec2::Zero(), 0);
  PlacementOptions options;
  PlacementReport report;
  place_objects(frame, entries, dead, ground, options, &report);
  expect(o, report.inserted_count() == 0,
         "all-infeasible raster still inserted " +
             std::to_string(report.inserted_count()));
  return o;
}

// ---------------------------------------------------------------------------
// 7. Occlusion removes shadowed points and only those.

Outcome occlusion_shadowing() {
  Outcome o;
  SensorConfig cfg;
  cfg.sensor_origin = Vec3::Zero();

  // One point per range view cell, at the cell center angles.
  auto plate = [&](double range, int u0, int u1, int v0, int v1, double marker) {
    PointCloud cloud;
    for (int v = v0; v < v1; ++v)
      for (int u = u0; u < u1; ++u) {
        cloud.positions.push_back(spherical_to_cart(range, rearranged_azimuth(u, cfg),
                                                    rearranged_inclination(v, cfg)));
        cloud.intensity.push_back(marker);
      }
    return cloud;
  };
  auto count_marker = [](const PointCloud& cloud, double marker) {
    std::size_t n = 0;
    for (double v : cloud.intensity) n += v == marker ? 1 : 0;
    return n;
  };

  const PointCloud wall = plate(5.0, 500, 540, 8, 24, 0.9);
  const PointCloud hidden = plate(20.0, 500, 540, 8, 24, 0.25);
  LidarFrame blocked;
  blocked.points = wall;
  for (std::size_t i = 0; i < hidden.size(); ++i)
    blocked.points.append_from(hidden, i);

  const LidarFrame shadowed = occlusion_filter(blocked, cfg);
  expect(o, count_marker(shadowed.points, 0.25) == 0,
         std::to_string(count_marker(shadowed.points, 0.25)) +
             " hidden points survived behind the wall");
  expect(o, count_marker(shadowed.points, 0.9) == wall.size(), "wall points were lost");

  // Same object in open space, no wall in front of it.
  LidarFrame open;
  open.points = wall;
  const PointCloud clear = plate(20.0, 800, 840, 8, 24, 0.25);
  for (std::size_t i = 0; i < clear.size(); ++i)
    open.points.append_from(clear, i);
  const LidarFrame kept = occlusion_filter(open, cfg);
  expect(o, count_marker(kept.points, 0.25) == clear.size(),
         "open space object lost " +
             std::to_string(clear.size() - count_marker(kept.points, 0.25)) +
             " of " + std::to_string(clear.size()) + " points");
  return o;
}

// ---------------------------------------------------------------------------
// 8. Virtual sweep kinematics.

Outcome sweep_kinematics() {
  Outcome o;
  Box3D box;
  box.center = Vec3(6.0, 3.0, 0.8);
  box.size = Vec3(4.2, 1.8, 1.6);
  box.yaw = 0.7;
  box.class_label = "car";
  Rng rng(88);
  PointCloud object;
  const Eigen::Matrix3d rot = yaw_rotation(box.yaw);
  for (int i = 0; i < 60; ++i) {
    const Vec3 local(box.size.x() * (rng.uniform01() - 0.5),
                     box.size.y() * (rng.uniform01() - 0.5),
                     box.size.z() * (rng.uniform01() - 0.5));
    object.positions.push_back(box.center + rot * local);
  }
  const std::size_t n = object.size();

  // Straight line at 10 m/s sampled 0.05 s back: the older copy sits
  // exactly 0.5 m behind along the heading.
  const PointCloud straight = virtual_sweeps(object, box, {10.0, 0.0}, 2, 0.05);
  expect(o, straight.size() == 2 * n, "copy count");
  for (std::size_t i = 0; i < n && o.pass; ++i) {
    const double shift = (straight.positions[n + i] - straight.positions[i]).norm();
    expect(o, std::abs(shift - 0.5) < 1e-9, "older copy shifted " + num(shift));
    expect(o, straight.time_offset[n + i] == -0.05,
           "time offset " + num(straight.time_offset[n + i]));
  }

  // A turning trajectory must still move every copy rigidly.
  const PointCloud turned = virtual_sweeps(object, box, {3.3, 0.8}, 3, 0.05);
  expect(o, turned.size() == 3 * n, "turning copy count");
  for (int k = 1; k < 3 && o.pass; ++k)
    for (std::size_t i = 0; i < n && o.pass; ++i)
      for (std::size_t j = i + 1; j < n; j += 7) {
        const double want = (object.positions[i] - object.positions[j]).norm();
        const double got =
            (turned.positions[k * n + i] - turned.positions[k * n + j]).norm();
        if (std::abs(got - want) >= 1e-9) {
          fail(o, "copy " + std::to_string(k) + " pair distance drifted " +
                      num(got - want));
          break;
        }
      }
  return o;
}

// ---------------------------------------------------------------------------
// 9. Bandit selection statistics.

Outcome bandit_statistics() {
  Outcome o;
  // Fresh grid: 16 equally credible cells must be drawn uniformly.
  const BanditGrid uniform_grid = BanditGrid::make(5.0, 10.0);
  expect(o, uniform_grid.cell_count() == 16,
         "grid has " + std::to_string(uniform_grid.cell_count()) + " cells");
  std::vector<std::size_t> tally(uniform_grid.cell_count(), 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
    ++tally[bandit_select(uniform_grid, 1, seed)[0]];
  const double expected = 10000.0 / static_cast<double>(tally.size());
  double chi2 = 0.0;
  for (const std::size_t count : tally) {
    const double d = static_cast<double>(count) - expected;
    chi2 += d * d / expected;
  }
  // 1% upper tail of the chi square distribution with 15 degrees of freedom.
  expect(o, chi2 < 30.578, "chi2 = " + num(chi2));

  // A failure-heavy cell must outrank a success-heavy one almost always.
  BanditGrid duel = BanditGrid::make(10.0, 10.0);  // 4 cells
  const std::size_t hard = duel.cell_of(5.0, 5.0);
  const std::size_t easy = duel.cell_of(-5.0, -5.0);
  duel.failure[hard] = 10;  // Beta(10, 1) scores
  duel.success[easy] = 10;  // Beta(1, 10) scores
  std::size_t wins = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const std::vector<std::size_t> order =
        bandit_select(duel, duel.cell_count(), seed);
    std::size_t pos_hard = 0, pos_easy = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == hard) pos_hard = i;
      if (order[i] == easy) pos_easy = i;
    }
    wins += pos_hard < pos_easy ? 1 : 0;
  }
  expect(o, wins >= 9000, "failure-heavy cell won only " + std::to_string(wins) +
                              " of 10000 duels");
  return o;
}

// ---------------------------------------------------------------------------
// 10. Colored cloud extraction.

CameraView look_at(const Vec3& eye, const Vec3& target, double f, int size) {
  CameraView view;
  view.fx = view.fy = f;
  view.cx = view.cy = size / 2.0;
  view.height = view.width = size;
  view.translation = eye;
  const Vec3 fwd = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(fwd.dot(up)) > 0.99) up = Vec3::UnitY();
  const Vec3 right = fwd.cross(up).normalized();
  const Vec3 down = fwd.cross(right).normalized();
  view.rotation.col(0) = right;
  view.rotation.col(1) = down;
  view.rotation.col(2) = fwd;
  return view;
}

// DC coefficient whose decode product lands bit-exactly on `target`.
double dc_coeff_for(double target) {
  double c = target / kSh0;
  while (c * kSh0 > target) c = std::nextafter(c, 0.0);
  while (c * kSh0 < target) c = std::nextafter(c, std::numeric_limits<double>::max());
  return c;
}

Outcome colored_extraction() {
  Outcome o;
  // Direction-free colors: every sample decodes to the same value, and the
  // value is exactly representable, so per-voxel means cannot depend on how
  // many rays visited the voxel.
  const Vec3 color(0.5, 0.25, 0.75);
  ShVoxelGrid grid;
  grid.nx = 3;
  grid.ny = 3;
  grid.nz = 2;
  grid.voxel_size = 1.0;
  grid.sh_degree = 0;
  for (std::uint32_t iz = 0; iz < grid.nz; ++iz)
    for (std::uint32_t iy = 0; iy < grid.ny; ++iy)
      for (std::uint32_t ix = 0; ix < grid.nx; ++ix) {
        grid.l_idx.push_back(grid.linear_index(ix, iy, iz));
        grid.density.push_back(1.0);
        for (int ch = 0; ch < 3; ++ch) grid.coeffs.push_back(dc_coeff_for(color[ch]));
      }
  const Vec3 center(1.5, 1.5, 1.0);
  const std::vector<CameraView> few = {look_at(center + Vec3(8, 0, 1), center, 32, 8),
                                       look_at(center + Vec3(0, -7, 2), center, 32, 8)};
  std::vector<CameraView> many = few;
  many.push_back(look_at(center + Vec3(-6, 3, 1), center, 32, 8));
  many.push_back(look_at(center + Vec3(2, 6, 3), center, 32, 8));
  many.push_back(look_at(center + Vec3(-4, -5, 2), center, 32, 8));

  const std::vector<CameraView>* view_sets[] = {&few, &many};
  for (const std::vector<CameraView>* views : view_sets) {
    const PointCloud cloud = extract_colored_cloud(grid, *views);
    expect(o, cloud.size() > 0, "extraction is empty");
    for (const auto& rgb : cloud.rgb)
      if (rgb.x() != color.x() || rgb.y() != color.y() || rgb.z() != color.z()) {
        fail(o, "color depends on the view set: " + num(rgb.x()) + " " +
                    num(rgb.y()) + " " + num(rgb.z()));
        break;
      }
  }

  // Reference march on a degree 2 grid: one plain loop per pixel.
  ShVoxelGrid deg2;
  deg2.nx = 6;
  deg2.ny = 5;
  deg2.nz = 4;
  deg2.voxel_size = 1.0;
  deg2.sh_degree = 2;
  Rng rng(4242);
  for (std::uint32_t iz = 0; iz < deg2.nz; ++iz)
    for (std::uint32_t iy = 0; iy < deg2.ny; ++iy)
      for (std::uint32_t ix = 0; ix < deg2.nx; ++ix) {
        if (rng.uniform01() < 0.3) continue;  // leave gaps
        deg2.l_idx.push_back(deg2.linear_index(ix, iy, iz));
        deg2.density.push_back(rng.uniform(0.2, 1.5));
        for (std::size_t i = 0; i < 3 * deg2.coeffs_per_channel(); ++i)
          deg2.coeffs.push_back(rng.uniform(-0.8, 1.8));
      }
  deg2.validate();
  const Vec3 mid(3.0, 2.5, 2.0);
  const std::vector<CameraView> views = {look_at(mid + Vec3(9, 1, 2), mid, 24, 6),
                                         look_at(mid + Vec3(-2, 8, 1), mid, 24, 6),
                                         look_at(mid + Vec3(-7, -6, 3), mid, 24, 6)};
  const double t_step = 0.37;
  const PointCloud cloud = extract_colored_cloud(deg2, views, t_step);

  struct Accum {
    Vec3 sum = Vec3::Zero();
    std::uint64_t count = 0;
  };
  std::map<std::uint64_t, Accum> reference;
  const Vec3 lo = deg2.origin;
  const Vec3 hi = deg2.origin + deg2.voxel_size * Vec3(deg2.nx, deg2.ny, deg2.nz);
  for (const auto& view : views)
    for (int v = 0; v < view.height; ++v)
      for (int u = 0; u < view.width; ++u) {
        const Vec3 dir = view.pixel_ray(u, v).normalized();
        double t0 = -std::numeric_limits<double>::infinity();
        double t1 = std::numeric_limits<double>::infinity();
        bool miss = false;
        for (int a = 0; a < 3 && !miss; ++a) {
          if (dir[a] == 0.0) {
            if (view.translation[a] < lo[a] || view.translation[a] > hi[a]) miss = true;
            continue;
          }
          double ta = (lo[a] - view.translation[a]) / dir[a];
          double tb = (hi[a] - view.translation[a]) / dir[a];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
        }
        if (miss || t0 > t1 || t1 < 0.0) continue;
        for (double t = std::max(t0, 0.0); t < t1; t += t_step) {
          const Vec3 p = view.translation + (t + 0.5 * t_step) * dir;
          const Vec3 rel = (p - deg2.origin) / deg2.voxel_size;
          if (rel.minCoeff() < 0) continue;
          const auto ix = static_cast<std::uint64_t>(rel.x());
          const auto iy = static_cast<std::uint64_t>(rel.y());
          const auto iz = static_cast<std::uint64_t>(rel.z());
          if (ix >= deg2.nx || iy >= deg2.ny || iz >= deg2.nz) continue;
          const std::uint64_t idx =
              deg2.linear_index(static_cast<std::uint32_t>(ix),
                                static_cast<std::uint32_t>(iy),
                                static_cast<std::uint32_t>(iz));
          const std::size_t slot = deg2.find(idx);
          if (slot == ShVoxelGrid::npos) continue;
          const auto basis = sh_basis(dir, deg2.sh_degree);
          const std::size_t k = deg2.coeffs_per_channel();
          const double* c = deg2.record_coeffs(slot);
          Accum& acc = reference[idx];
          for (int ch = 0; ch < 3; ++ch) {
            double val = 0.0;
            for (std::size_t i = 0; i < k; ++i) val += c[ch * k + i] * basis[i];
            acc.sum[ch] += std::clamp(val, 0.0, 1.0);
          }
          acc.count += 1;
        }
      }

  expect(o, cloud.size() == reference.size(),
         "extracted " + std::to_string(cloud.size()) + " voxels, reference hit " +
             std::to_string(reference.size()));
  for (std::size_t i = 0; i < cloud.size() && o.pass; ++i) {
    const Vec3 rel = (cloud.positions[i] - deg2.origin) / deg2.voxel_size;
    const auto ix = static_cast<std::uint32_t>(std::llround(rel.x() - 0.5));
    const auto iy = static_cast<std::uint32_t>(std::llround(rel.y() - 0.5));
    const auto iz = static_cast<std::uint32_t>(std::llround(rel.z() - 0.5));
    const auto it = reference.find(deg2.linear_index(ix, iy, iz));
    if (it == reference.end()) {
      fail(o, "extracted voxel missing from the reference march");
      break;
    }
    const Vec3 want = it->second.sum / static_cast<double>(it->second.count);
    if ((cloud.rgb[i] - want).cwiseAbs().maxCoeff() >= 1e-12)
      fail(o, "voxel mean off by " +
                  num((cloud.rgb[i] - want).cwiseAbs().maxCoeff()));
  }
  return o;
}

// ---------------------------------------------------------------------------
// 11. Gaussian summary distance closed forms.

GaussianSummary scalar_summary(double mean, double variance) {
  GaussianSummary g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.covariance = Eigen::MatrixXd::Constant(1, 1, variance);
  return g;
}

Outcome gaussian_distance_forms() {
  Outcome o;
  Rng rng(31);

  // Scalar closed form (mu_a - mu_b)^2 + (sqrt(va) - sqrt(vb))^2.
  for (int trial = 0; trial < 100 && o.pass; ++trial) {
    const double mu_a = rng.uniform(-5.0, 5.0), mu_b = rng.uniform(-5.0, 5.0);
    const double va = rng.uniform(0.0, 3.0), vb = rng.uniform(0.0, 3.0);
    const double got =
        frechet_distance(scalar_summary(mu_a, va), scalar_summary(mu_b, vb), 0.0);
    const double gap = std::sqrt(va) - std::sqrt(vb);
    const double want = (mu_a - mu_b) * (mu_a - mu_b) + gap * gap;
    expect(o, std::abs(got - want) < 1e-9,
           "trial " + std::to_string(trial) + ": " + num(got) + " vs " + num(want));
  }

  // Distance of a summary to itself.
  std::vector<Eigen::VectorXd> samples;
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd s(4);
    for (int d = 0; d < 4; ++d) s[d] = rng.gaussian() * (d + 1);
    samples.push_back(s);
  }
  const GaussianSummary g = summarize(samples);
  const double self = frechet_distance(g, g);
  expect(o, self >= 0.0 && self < 1e-9, "self distance " + num(self));

  // Symmetry on random well-conditioned pairs.
  for (int trial = 0; trial < 20 && o.pass; ++trial) {
    GaussianSummary a, b;
    a.mean = Eigen::VectorXd::Zero(5);
    b.mean = Eigen::VectorXd::Zero(5);
    Eigen::MatrixXd ra(5, 5), rb(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        a.mean[i] = rng.gaussian();
        b.mean[i] = rng.gaussian();
        ra(i, j) = rng.gaussian();
        rb(i, j) = rng.gaussian();
      }
    a.covariance = ra.transpose() * ra;
    b.covariance = rb.transpose() * rb;
    const double ab = frechet_distance(a, b);
    const double ba = frechet_distance(b, a);
    expect(o, std::abs(ab - ba) < 1e-8, "asymmetry " + num(ab - ba));
  }
  return o;
}

// ---------------------------------------------------------------------------
// 12. Bank generation constants and determinism.

IntensityCalibration handmade_calibration(const std::vector<std::string>& classes) {
  IntensityCalibration calibration;
  calibration.k = 4;
  calibration.bins = 64;
  for (const auto& label : classes) {
    ClassCalibration cls;
    for (int i = 0; i < 8; ++i)
      cls.exemplars.push_back({Vec3(0.125 * i, 0.5, 0.5), 0.25});
    cls.histogram = IntensityHistogram::fit({0.25}, 64);
    calibration.classes[label] = cls;
  }
  return calibration;
}

PointCloud uniform_rgb_box(std::size_t n, const Vec3& size, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.positions.push_back(Vec3(size.x() * (rng.uniform01() - 0.5),
                                   size.y() * (rng.uniform01() - 0.5),
                                   size.z() * (rng.uniform01() - 0.5)));
    cloud.rgb.push_back(Vec3(0.5, 0.5, 0.5));
  }
  return cloud;
}

Outcome bank_constants() {
  Outcome o;
  const BankGenConfig defaults;
  expect(o, defaults.headings_deg.size() == 13,
         std::to_string(defaults.headings_deg.size()) + " default headings");
  expect(o, defaults.min_points == 16,
         "default entry floor " + std::to_string(defaults.min_points));
  const CalibrationFitOptions fit_defaults;
  expect(o, fit_defaults.min_points == 256,
         "default calibration floor " + std::to_string(fit_defaults.min_points));

  // 255 colored points are rejected, 256 are accepted.
  auto pair_of = [](std::size_t n) {
    SamplePair pair;
    Rng rng(12);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 p(rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0), rng.uniform01());
      pair.fake.positions.push_back(p);
      pair.fake.rgb.push_back(Vec3(0.4, 0.5, 0.6));
      pair.real.positions.push_back(p);
      pair.real.intensity.push_back(0.3);
    }
    return pair;
  };
  bool rejected = false;
  try {
    fit_calibration({{"car", {pair_of(255)}}});
  } catch (const ValidationError&) {
    rejected = true;
  }
  expect(o, rejected, "a 255 point source was accepted");
  try {
    const IntensityCalibration fitted = fit_calibration({{"car", {pair_of(256)}}});
    expect(o, fitted.classes.count("car") == 1, "256 point source missing from fit");
  } catch (const std::exception& e) {
    fail(o, std::string("256 point source rejected: ") + e.what());
  }

  // Thin far-range buckets fall under the floor; everything kept is >= 16.
  std::vector<BankSource> sources(2);
  sources[0].source_id = "rich";
  sources[0].class_label = "car";
  sources[0].dense = uniform_rgb_box(3000, Vec3(4.2, 1.8, 1.6), 77);
  sources[1].source_id = "sparse";
  sources[1].class_label = "car";
  sources[1].dense = uniform_rgb_box(90, Vec3(4.2, 1.8, 1.6), 78);
  BankGenConfig config;
  config.ranges_m = {10.0, 50.0};
  config.seed = 9;
  const IntensityCalibration calibration = handmade_calibration({"car"});
  const ObjectBank bank = generate_bank(sources, calibration, config);
  expect(o, bank.entries.size() + bank.discarded ==
                config.headings_deg.size() * config.ranges_m.size() * sources.size(),
         "bucket accounting is off");
  expect(o, bank.discarded > 0, "no bucket fell under the floor");
  for (const auto& e : bank.entries)
    if (e.points.size() < 16) {
      fail(o, "entry with " + std::to_string(e.points.size()) + " points kept");
      break;
    }

  // Same seed, same bytes.
  const fs::path root = fs::temp_directory_path() / "lidaraug_acceptance_bank";
  fs::remove_all(root);
  fs::create_directories(root);
  write_bank(bank, root / "first");
  write_bank(generate_bank(sources, calibration, config), root / "second");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const char* name : {"manifest", "boxes"})
    expect(o, slurp(root / "first" / name) == slurp(root / "second" / name),
           std::string(name) + " differs between identically seeded builds");
  std::size_t payloads = 0;
  for (const auto& file : fs::directory_iterator(root / "first" / "entries")) {
    ++payloads;
    const fs::path twin = root / "second" / "entries" / file.path().filename();
    if (slurp(file.path()) != slurp(twin)) {
      fail(o, file.path().filename().string() + " differs between builds");
      break;
    }
  }
  expect(o, payloads == bank.entries.size(), "payload file count mismatch");
  fs::remove_all(root);
  return o;
}

// ---------------------------------------------------------------------------
// 13. End to end pipeline on a synthetic three-object set.

Outcome end_to_end_pipeline() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "lidaraug_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);

  // Three box-shaped objects as DC voxel grids with distinct colors.
  struct ObjectSpec {
    const char* id;
    Vec3 color;
    std::uint32_t nx, ny, nz;
  };
  const ObjectSpec specs[] = {{"sedan", Vec3(0.7, 0.2, 0.2), 12, 6, 5},
                              {"wagon", Vec3(0.2, 0.6, 0.3), 13, 6, 5},
                              {"coupe", Vec3(0.3, 0.3, 0.8), 12, 6, 4}};

  std::vector<BankSource> sources;
  std::map<std::string, std::vector<SamplePair>> calibration_samples;
  for (const auto& spec : specs) {
    ShVoxelGrid grid;
    grid.nx = spec.nx;
    grid.ny = spec.ny;
    grid.nz = spec.nz;
    grid.voxel_size = 0.35;
    grid.sh_degree = 0;
    for (std::uint32_t iz = 0; iz < grid.nz; ++iz)
      for (std::uint32_t iy = 0; iy < grid.ny; ++iy)
        for (std::uint32_t ix = 0; ix < grid.nx; ++ix) {
          grid.l_idx.push_back(grid.linear_index(ix, iy, iz));
          grid.density.push_back(1.0);
          for (int ch = 0; ch < 3; ++ch) grid.coeffs.push_back(spec.color[ch] / kSh0);
        }
    const Vec3 center =
        grid.origin + 0.5 * grid.voxel_size * Vec3(grid.nx, grid.ny, grid.nz);
    std::vector<CameraView> views;
    for (int k = 0; k < 6; ++k) {
      const double az = 2.0 * M_PI * k / 6;
      views.push_back(look_at(center + 6.0 * Vec3(std::cos(az), std::sin(az), 0.4),
                              center, 64, 64));
    }
    const PointCloud colored = extract_colored_cloud(grid, views);
    expect(o, colored.size() >= 256,
           std::string(spec.id) + " extracted only " + std::to_string(colored.size()));
    if (!o.pass) break;

    BankSource source;
    source.source_id = spec.id;
    source.class_label = "car";
    source.dense = pca_align(colored).aligned;
    sources.push_back(std::move(source));

    SamplePair pair;
    pair.fake = colored;
    pair.real = colored;
    pair.real.rgb.clear();
    pair.real.intensity.resize(pair.real.size());
    for (std::size_t i = 0; i < pair.real.size(); ++i)
      pair.real.intensity[i] = 0.2 + 0.6 * (i % 100) / 100.0;
    calibration_samples["car"].push_back(std::move(pair));
  }
  if (!o.pass) {
    fs::remove_all(root);
    return o;
  }

  const IntensityCalibration calibration = fit_calibration(calibration_samples);

  BankGenConfig config;
  config.headings_deg = {-90.0, 0.0, 90.0};
  config.ranges_m = {10.0, 20.0};
  config.seed = 13;
  const ObjectBank bank = generate_bank(sources, calibration, config);
  expect(o, bank.entries.size() >= 2,
         "bank kept only " + std::to_string(bank.entries.size()) + " entries");
  write_bank(bank, root / "bank");

  // Compose a scene and write every artifact a training run would consume.
  LidarFrame frame = flat_scene(2027, 10000);
  const GroundEstimate ground = estimate_ground(frame);
  const FeasibilityRaster prior = FeasibilityRaster::make(51.2, 0.128, Vec2::Zero(), 1);
  const FeasibilityRaster feasibility = fuse_feasibility(prior, ground, frame);
  std::vector<const ObjectBankEntry*> picks;
  for (std::size_t i = 0; i < 4 && i < bank.entries.size(); ++i)
    picks.push_back(&bank.entries[i]);
  PlacementOptions options;
  options.seed = 31;
  PlacementReport report;
  const LidarFrame augmented =
      place_objects(frame, picks, feasibility, ground, options, &report);
  expect(o, report.inserted_count() > 0, "nothing was inserted");
  write_lidar_bin(augmented.points, PointLayout::XYZI, root / "augmented.bin");
  write_boxes(augmented.boxes, root / "augmented_boxes.txt");
  write_placement_report(report, root / "placement_report.txt");

  // Score the bank against itself and report the class balance.
  std::vector<Eigen::VectorXd> features;
  std::vector<Box3D> boxes;
  for (const auto& e : bank.entries) {
    features.push_back(featurize(e.points, e.box));
    Box3D b = e.box;
    b.class_label = e.class_label;
    boxes.push_back(b);
  }
  const GaussianSummary summary = summarize(features);
  const double self_distance = frechet_distance(summary, summary);
  std::ofstream eval_report(root / "eval.txt");
  eval_report << "class car frechet " << self_distance << "\n";
  print_class_balance(eval_report, class_balance(boxes));
  eval_report.close();
  expect(o, self_distance < 1e-6, "self distance " + num(self_distance));

  for (const char* name : {"bank/manifest", "bank/boxes", "augmented.bin",
                           "augmented_boxes.txt", "placement_report.txt", "eval.txt"})
    expect(o, fs::exists(root / name), std::string(name) + " was not written");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;  // 0: no individual budget
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"range view lattice constants", 1.0, lattice_constants},
      {"range view min depth filtering", 30.0, range_view_filtering},
      {"assignment solver vs exhaustive search", 30.0, assignment_oracle},
      {"group intensity distance scaling", 0.0, group_distance_scaling},
      {"feasibility raster geometry and fusion", 0.0, raster_geometry_and_fusion},
      {"collision free placement", 0.0, collision_free_placement},
      {"occlusion shadowing", 0.0, occlusion_shadowing},
      {"virtual sweep kinematics", 0.0, sweep_kinematics},
      {"bandit selection statistics", 10.0, bandit_statistics},
      {"colored cloud extraction", 0.0, colored_extraction},
      {"gaussian summary distance", 0.0, gaussian_distance_forms},
      {"bank generation constants", 0.0, bank_constants},
      {"end to end pipeline", 120.0, end_to_end_pipeline},
  };

  int failures = 0;
  int index = 0;
  for (const auto& criterion : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("unexpected exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (criterion.budget_s > 0.0 && seconds >= criterion.budget_s)
      fail(outcome, "over the " + num(criterion.budget_s) + " s budget");

    std::cout << std::setw(2) << index << ' ' << (outcome.pass ? "PASS" : "FAIL")
              << ' ' << criterion.name << " [" << std::fixed << std::setprecision(2)
              << seconds << " s]" << std::defaultfloat;
    if (!outcome.pass) std::cout << ": " << outcome.detail;
    std::cout << "\n";
    failures += outcome.pass ? 0 : 1;
  }
  std::cout << (index - failures) << "/" << index << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
