#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/compose/ground.hpp"

namespace lidaraug {

/// Square ego-centered binary raster: cell value 1 marks a pixel where an
/// object may be inserted. P = round(2*radius/resolution) pixels per side;
/// pixel (0,0) sits at the (min x, min y) corner, rows advance along +y.
struct FeasibilityRaster {
  double radius = 51.2;      // meters, half the side length
  double resolution = 0.128; // meters per pixel
  Vec2 center = Vec2::Zero();
  std::vector<std::uint8_t> cells;

  int size() const {
    return static_cast<int>(std::llround(2.0 * radius / resolution));
  }

  static FeasibilityRaster make(double radius, double resolution,
                                const Vec2& center = Vec2::Zero(),
                                std::uint8_t fill = 0) {
    FeasibilityRaster raster;
    raster.radius = radius;
    raster.resolution = resolution;
    raster.center = center;
    const int p = raster.size();
    raster.cells.assign(static_cast<std::size_t>(p) * p, fill);
    return raster;
  }

  double min_x() const { return center.x() - radius; }
  double min_y() const { return center.y() - radius; }

  bool world_to_pixel(double x, double y, int& px, int& py) const {
    px = static_cast<int>(std::floor((x - min_x()) / resolution));
    py = static_cast<int>(std::floor((y - min_y()) / resolution));
    const int p = size();
    return px >= 0 && px < p && py >= 0 && py < p;
  }

  Vec2 pixel_center(int px, int py) const {
    return {min_x() + (px + 0.5) * resolution, min_y() + (py + 0.5) * resolution};
  }

  std::uint8_t& at(int px, int py) { return cells[static_cast<std::size_t>(py) * size() + px]; }
  std::uint8_t at(int px, int py) const {
    return cells[static_cast<std::size_t>(py) * size() + px];
  }

  bool same_geometry(const FeasibilityRaster& other) const {
    return radius == other.radius && resolution == other.resolution &&
           center.x() == other.center.x() && center.y() == other.center.y() &&
           cells.size() == other.cells.size();
  }

  void validate() const {
    if (!(radius > 0.0)) throw ValidationError("FeasibilityRaster: radius must be > 0");
    if (!(resolution > 0.0))
      throw ValidationError("FeasibilityRaster: resolution must be > 0");
    const int p = size();
    if (p < 1) throw ValidationError("FeasibilityRaster: empty grid");
    if (cells.size() != static_cast<std::size_t>(p) * p)
      throw ValidationError("FeasibilityRaster: cell count " +
                            std::to_string(cells.size()) + " != " +
                            std::to_string(static_cast<std::size_t>(p) * p));
    for (std::uint8_t v : cells)
      if (v > 1) throw ValidationError("FeasibilityRaster: cell value must be 0 or 1");
  }
};

/// 1 where the frame drops at least density_threshold returns on a pixel.
inline FeasibilityRaster rasterize_observed(const LidarFrame& frame,
                                            const FeasibilityRaster& geometry,
                                            std::size_t density_threshold = 1) {
  FeasibilityRaster observed =
      FeasibilityRaster::make(geometry.radius, geometry.resolution, geometry.center);
  const int p = observed.size();
  std::vector<std::uint32_t> density(observed.cells.size(), 0);
  for (const auto& pt : frame.points.positions) {
    int px, py;
    if (observed.world_to_pixel(pt.x(), pt.y(), px, py))
      ++density[static_cast<std::size_t>(py) * p + px];
  }
  for (std::size_t i = 0; i < density.size(); ++i)
    observed.cells[i] = density[i] >= density_threshold ? 1 : 0;
  return observed;
}

/// 1 where the pixel's ground cell holds at least one ground inlier.
inline FeasibilityRaster rasterize_ground(const GroundEstimate& ground,
                                          const FeasibilityRaster& geometry) {
  FeasibilityRaster bit =
      FeasibilityRaster::make(geometry.radius, geometry.resolution, geometry.center);
  const int p = bit.size();
  for (int py = 0; py < p; ++py)
    for (int px = 0; px < p; ++px) {
      const Vec2 w = bit.pixel_center(px, py);
      bit.at(px, py) = ground.cell_has_inlier(w.x(), w.y()) ? 1 : 0;
    }
  return bit;
}

/// Pixelwise select: unobserved pixels keep the map value, observed pixels
/// take the ground bit. All three rasters must share geometry.
inline FeasibilityRaster fuse_feasibility(const FeasibilityRaster& map_raster,
                                          const FeasibilityRaster& observed,
                                          const FeasibilityRaster& ground_bit) {
  map_raster.validate();
  observed.validate();
  ground_bit.validate();
  if (!map_raster.same_geometry(observed) || !map_raster.same_geometry(ground_bit))
    throw ValidationError("fuse_feasibility: raster geometry mismatch");
  FeasibilityRaster fused = map_raster;
  for (std::size_t i = 0; i < fused.cells.size(); ++i)
    if (observed.cells[i]) fused.cells[i] = ground_bit.cells[i];
  return fused;
}

/// Blend a map-derived raster with LiDAR evidence: pixels seen by fewer
/// than density_threshold returns keep the map value; observed pixels are
/// feasible only where the ground estimate found an inlier.
inline FeasibilityRaster fuse_feasibility(const FeasibilityRaster& map_raster,
                                          const GroundEstimate& ground,
                                          const LidarFrame& frame,
                                          std::size_t density_threshold = 1) {
  return fuse_feasibility(map_raster,
                          rasterize_observed(frame, map_raster, density_threshold),
                          rasterize_ground(ground, map_raster));
}

// ---------------------------------------------------------------------------
// Persistence: 8-bit binary PGM (P5) where pixel value 1 = insertable, plus
// a sidecar text file `origin_x origin_y resolution radius` (origin is the
// min-corner world coordinate). The sidecar lives at <pgm path> + ".geom".

namespace detail {

inline int pgm_next_int(std::ifstream& in, const std::string& path) {
  // Skip whitespace and '#' comment lines, then read one integer.
  int c;
  while ((c = in.peek()) != EOF) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value;
  if (!(in >> value)) throw FormatError(path + ": malformed PGM header");
  return value;
}

}  // namespace detail

inline void write_feasibility_pgm(const FeasibilityRaster& raster,
                                  const std::filesystem::path& path) {
  raster.validate();
  const int p = raster.size();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out << "P5\n" << p << ' ' << p << "\n255\n";
  out.write(reinterpret_cast<const char*>(raster.cells.data()),
            static_cast<std::streamsize>(raster.cells.size()));
  if (!out) throw FormatError("short write: " + path.string());

  std::ofstream side(path.string() + ".geom");
  if (!side)
    throw FormatError("cannot open file for writing: " + path.string() + ".geom");
  side << std::setprecision(std::numeric_limits<double>::max_digits10);
  side << raster.min_x() << ' ' << raster.min_y() << ' ' << raster.resolution << ' '
       << raster.radius << '\n';
}

inline FeasibilityRaster read_feasibility_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  char magic[2];
  if (!in.read(magic, 2) || magic[0] != 'P' || magic[1] != '5')
    throw FormatError(path.string() + ": not a binary PGM (P5)");
  const int width = detail::pgm_next_int(in, path.string());
  const int height = detail::pgm_next_int(in, path.string());
  const int maxval = detail::pgm_next_int(in, path.string());
  if (width != height)
    throw FormatError(path.string() + ": raster must be square, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  if (maxval <= 0 || maxval > 255)
    throw FormatError(path.string() + ": unsupported PGM maxval");
  in.get();  // single whitespace after maxval

  std::ifstream side(path.string() + ".geom");
  if (!side) throw FormatError("cannot open file: " + path.string() + ".geom");
  double origin_x, origin_y, resolution, radius;
  if (!(side >> origin_x >> origin_y >> resolution >> radius))
    throw FormatError(path.string() + ".geom: malformed geometry sidecar");

  FeasibilityRaster raster;
  raster.radius = radius;
  raster.resolution = resolution;
  raster.center = Vec2(origin_x + radius, origin_y + radius);
  if (raster.size() != width)
    throw FormatError(path.string() + ": PGM size " + std::to_string(width) +
                      " != round(2*radius/resolution) = " +
                      std::to_string(raster.size()));
  raster.cells.resize(static_cast<std::size_t>(width) * height);
  if (!in.read(reinterpret_cast<char*>(raster.cells.data()),
               static_cast<std::streamsize>(raster.cells.size())))
    throw FormatError(path.string() + ": truncated PGM payload");
  for (auto& v : raster.cells) v = v >= 1 ? 1 : 0;
  raster.validate();
  return raster;
}

}  // namespace lidaraug
