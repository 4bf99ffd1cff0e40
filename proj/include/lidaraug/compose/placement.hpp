#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "lidaraug/bank/bank.hpp"
#include "lidaraug/compose/bandit.hpp"
#include "lidaraug/compose/ground.hpp"
#include "lidaraug/compose/occlusion.hpp"
#include "lidaraug/compose/raster.hpp"
#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/rng.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// BEV footprint corners of a box, counterclockwise.
inline std::array<Vec2, 4> box_corners_bev(const Box3D& box) {
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const double hx = 0.5 * box.size.x(), hy = 0.5 * box.size.y();
  std::array<Vec2, 4> corners;
  const std::array<Vec2, 4> local{Vec2{hx, hy}, Vec2{-hx, hy}, Vec2{-hx, -hy},
                                  Vec2{hx, -hy}};
  for (int i = 0; i < 4; ++i)
    corners[i] = Vec2(box.center.x() + c * local[i].x() - s * local[i].y(),
                      box.center.y() + s * local[i].x() + c * local[i].y());
  return corners;
}

/// Separating-axis test on the two BEV rectangles. With margin > 0 the
/// rectangles only count as disjoint when some axis shows a gap of at
/// least margin, so accepted placements keep a real clearance.
inline bool rects_intersect_bev(const Box3D& a, const Box3D& b, double margin = 0.0) {
  const auto ca = box_corners_bev(a);
  const auto cb = box_corners_bev(b);
  const std::array<Vec2, 4> axes{
      Vec2{std::cos(a.yaw), std::sin(a.yaw)}, Vec2{-std::sin(a.yaw), std::cos(a.yaw)},
      Vec2{std::cos(b.yaw), std::sin(b.yaw)}, Vec2{-std::sin(b.yaw), std::cos(b.yaw)}};
  for (const Vec2& axis : axes) {
    double min_a = 1e300, max_a = -1e300, min_b = 1e300, max_b = -1e300;
    for (int i = 0; i < 4; ++i) {
      const double pa = axis.dot(ca[i]);
      const double pb = axis.dot(cb[i]);
      min_a = std::min(min_a, pa);
      max_a = std::max(max_a, pa);
      min_b = std::min(min_b, pb);
      max_b = std::max(max_b, pb);
    }
    if (std::min(max_a, max_b) - std::max(min_a, min_b) <= -margin) return false;
  }
  return true;
}

/// Convex polygon area of the BEV intersection (Sutherland-Hodgman clip of
/// a's footprint against b's half-planes). Independent of the SAT route.
inline double bev_intersection_area(const Box3D& a, const Box3D& b) {
  const auto ca = box_corners_bev(a);
  const auto cb = box_corners_bev(b);
  std::vector<Vec2> poly(ca.begin(), ca.end());
  for (int e = 0; e < 4 && !poly.empty(); ++e) {
    const Vec2& p0 = cb[e];
    const Vec2& p1 = cb[(e + 1) % 4];
    const Vec2 edge = p1 - p0;
    auto inside = [&](const Vec2& q) {
      return edge.x() * (q.y() - p0.y()) - edge.y() * (q.x() - p0.x()) >= 0.0;
    };
    std::vector<Vec2> clipped;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& cur = poly[i];
      const Vec2& nxt = poly[(i + 1) % poly.size()];
      const bool cur_in = inside(cur);
      const bool nxt_in = inside(nxt);
      if (cur_in) clipped.push_back(cur);
      if (cur_in != nxt_in) {
        const double denom = edge.x() * (nxt.y() - cur.y()) - edge.y() * (nxt.x() - cur.x());
        const double t =
            (edge.x() * (p0.y() - cur.y()) - edge.y() * (p0.x() - cur.x())) / denom;
        clipped.push_back(cur + t * (nxt - cur));
      }
    }
    poly.swap(clipped);
  }
  if (poly.size() < 3) return 0.0;
  double twice_area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice_area += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * std::abs(twice_area);
}

inline double bev_iou(const Box3D& a, const Box3D& b) {
  const double inter = bev_intersection_area(a, b);
  const double area_a = a.size.x() * a.size.y();
  const double area_b = b.size.x() * b.size.y();
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

// ---------------------------------------------------------------------------

struct PlacementOptions {
  int max_attempts = 100;
  std::uint64_t seed = 0;
  double safety_margin = 1e-6;  // required BEV clearance between boxes
  bool use_bandit = false;
  const BanditGrid* bandit = nullptr;
  std::size_t bandit_top_n = 32;
  bool apply_occlusion = false;  // run occlusion_filter after all insertions
  SensorConfig sensor;
  double eps_depth = 0.3;
};

struct PlacementOutcome {
  std::size_t entry_index = 0;
  std::string class_label;
  bool inserted = false;
  int attempts = 0;
  std::string reason;  // "ok", "no_feasible_pixel", "max_attempts"
  Box3D box;
};

struct PlacementReport {
  std::vector<PlacementOutcome> outcomes;
  std::size_t removed_scene_points = 0;

  std::size_t inserted_count() const {
    std::size_t n = 0;
    for (const auto& o : outcomes) n += o.inserted ? 1 : 0;
    return n;
  }
  std::size_t skipped_count() const { return outcomes.size() - inserted_count(); }
};

inline void write_placement_report(const PlacementReport& report,
                                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out << "# entry class inserted attempts reason cx cy cz yaw\n";
  out.precision(17);
  for (const auto& o : report.outcomes) {
    out << o.entry_index << ' ' << o.class_label << ' ' << (o.inserted ? 1 : 0) << ' '
        << o.attempts << ' ' << o.reason;
    if (o.inserted)
      out << ' ' << o.box.center.x() << ' ' << o.box.center.y() << ' '
          << o.box.center.z() << ' ' << o.box.yaw;
    out << '\n';
  }
  out << "# inserted " << report.inserted_count() << " skipped "
      << report.skipped_count() << " removed_scene_points "
      << report.removed_scene_points << '\n';
}

namespace detail {

/// Every raster pixel whose center the footprint covers must be feasible;
/// a footprint reaching past the raster edge fails.
inline bool footprint_feasible(const Box3D& box, const FeasibilityRaster& feas) {
  const auto corners = box_corners_bev(box);
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& c : corners) {
    min_x = std::min(min_x, c.x());
    max_x = std::max(max_x, c.x());
    min_y = std::min(min_y, c.y());
    max_y = std::max(max_y, c.y());
  }
  int px0, py0, px1, py1;
  if (!feas.world_to_pixel(min_x, min_y, px0, py0)) return false;
  if (!feas.world_to_pixel(max_x, max_y, px1, py1)) return false;

  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  for (int py = py0; py <= py1; ++py) {
    for (int px = px0; px <= px1; ++px) {
      const Vec2 w = feas.pixel_center(px, py);
      const double dx = w.x() - box.center.x();
      const double dy = w.y() - box.center.y();
      const double lx = c * dx + s * dy;
      const double ly = -s * dx + c * dy;
      if (std::abs(lx) <= 0.5 * box.size.x() && std::abs(ly) <= 0.5 * box.size.y() &&
          !feas.at(px, py))
        return false;
    }
  }
  return true;
}

}  // namespace detail

/// Insert bank entries into a frame: each entry gets up to max_attempts
/// draws of a feasible pixel (uniform, or restricted to Thompson-selected
/// bandit cells), lands with its box bottom on the local ground, and is
/// rejected while its footprint leaves feasible pixels or its BEV
/// rectangle intersects any existing or already inserted box. Scene points
/// inside an accepted box are removed. Entries that never fit are skipped
/// and recorded in the report.
inline LidarFrame place_objects(const LidarFrame& frame,
                                const std::vector<const ObjectBankEntry*>& entries,
                                const FeasibilityRaster& feas,
                                const GroundEstimate& ground,
                                const PlacementOptions& options,
                                PlacementReport* report = nullptr) {
  if (entries.empty()) throw ValidationError("place_objects: no entries given");
  feas.validate();
  if (options.use_bandit && options.bandit == nullptr)
    throw ValidationError("place_objects: bandit mode without a bandit grid");
  if (!frame.points.empty() && !frame.points.has_intensity())
    throw ValidationError("place_objects: scene points need an intensity channel");

  std::vector<std::size_t> feasible_pixels;
  for (std::size_t i = 0; i < feas.cells.size(); ++i)
    if (feas.cells[i]) feasible_pixels.push_back(i);

  LidarFrame out;
  out.points = frame.points;
  out.boxes = frame.boxes;
  out.ego_pose = frame.ego_pose;

  PlacementReport local_report;
  Rng rng(options.seed);
  const int p = feas.size();
  std::vector<Box3D> inserted_boxes;

  for (std::size_t e = 0; e < entries.size(); ++e) {
    const ObjectBankEntry& entry = *entries[e];
    PlacementOutcome outcome;
    outcome.entry_index = e;
    outcome.class_label = entry.class_label;

    if (feasible_pixels.empty()) {
      outcome.reason = "no_feasible_pixel";
      local_report.outcomes.push_back(outcome);
      continue;
    }

    // In bandit mode each entry restricts draws to the feasible pixels of
    // the Thompson-selected cells, falling back to the full list when the
    // selection covers none.
    const std::vector<std::size_t>* pool = &feasible_pixels;
    std::vector<std::size_t> bandit_pool;
    if (options.use_bandit) {
      const auto cells = bandit_select(
          *options.bandit, std::min(options.bandit_top_n, options.bandit->cell_count()),
          rng.next_u64());
      for (std::size_t idx : feasible_pixels) {
        const int px = static_cast<int>(idx % p);
        const int py = static_cast<int>(idx / p);
        const Vec2 w = feas.pixel_center(px, py);
        const std::size_t cell = options.bandit->cell_of(w.x(), w.y());
        if (std::find(cells.begin(), cells.end(), cell) != cells.end())
          bandit_pool.push_back(idx);
      }
      if (!bandit_pool.empty()) pool = &bandit_pool;
    }

    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
      ++outcome.attempts;
      const std::size_t pixel = (*pool)[rng.uniform_index(pool->size())];
      const int px = static_cast<int>(pixel % p);
      const int py = static_cast<int>(pixel / p);
      const Vec2 w = feas.pixel_center(px, py);

      Box3D box = entry.box;
      box.class_label = entry.class_label;
      box.yaw = normalize_yaw(entry.heading_deg * M_PI / 180.0);
      box.center = Vec3(w.x(), w.y(),
                        ground.height_at(w.x(), w.y()) + 0.5 * entry.box.size.z());

      if (!detail::footprint_feasible(box, feas)) continue;
      bool collides = false;
      for (const auto& other : out.boxes)
        if (rects_intersect_bev(box, other, options.safety_margin)) {
          collides = true;
          break;
        }
      if (collides) continue;

      const Eigen::Matrix3d rot = yaw_rotation(box.yaw);
      for (std::size_t i = 0; i < entry.points.size(); ++i) {
        out.points.positions.push_back(rot * entry.points.positions[i] + box.center);
        out.points.intensity.push_back(entry.points.intensity[i]);
      }
      out.boxes.push_back(box);
      inserted_boxes.push_back(box);
      outcome.inserted = true;
      outcome.reason = "ok";
      outcome.box = box;
      break;
    }
    if (!outcome.inserted) outcome.reason = "max_attempts";
    local_report.outcomes.push_back(outcome);
  }

  // Scene returns swallowed by an inserted volume disappear with it.
  if (!inserted_boxes.empty()) {
    const std::size_t scene_count = frame.points.size();
    PointCloud kept;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      bool swallowed = false;
      if (i < scene_count) {
        for (const auto& box : inserted_boxes)
          if (box.contains(out.points.positions[i])) {
            swallowed = true;
            break;
          }
      }
      if (swallowed) {
        ++local_report.removed_scene_points;
        continue;
      }
      kept.append_from(out.points, i);
    }
    out.points = std::move(kept);
  }

  if (options.apply_occlusion)
    out = occlusion_filter(out, options.sensor, options.eps_depth);

  if (report) *report = std::move(local_report);
  return out;
}

}  // namespace lidaraug
