#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

static_assert(std::endian::native == std::endian::little,
              "point binary IO assumes a little-endian host");

/// Record layouts for point binaries: consecutive little-endian 32-bit
/// floats per point, no padding.
///   XYZI  : x y z intensity            (16 bytes)
///   XYZIR : x y z intensity ring       (20 bytes)
///   XYZIT : x y z intensity time       (20 bytes)
enum class PointLayout { XYZI, XYZIR, XYZIT };

inline std::size_t layout_floats(PointLayout layout) {
  return layout == PointLayout::XYZI ? 4 : 5;
}

inline std::string layout_name(PointLayout layout) {
  switch (layout) {
    case PointLayout::XYZI: return "XYZI";
    case PointLayout::XYZIR: return "XYZIR";
    default: return "XYZIT";
  }
}

inline PointLayout layout_from_name(const std::string& name) {
  if (name == "XYZI" || name == "xyzi") return PointLayout::XYZI;
  if (name == "XYZIR" || name == "xyzir") return PointLayout::XYZIR;
  if (name == "XYZIT" || name == "xyzit") return PointLayout::XYZIT;
  throw ValidationError("unknown point layout: " + name);
}

namespace detail {

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return bytes;
}

inline float load_f32(const char* p) {
  float v;
  std::memcpy(&v, p, sizeof(float));
  return v;
}

// Shortest decimal text that round-trips a double exactly.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace detail

/// Read a point binary. `intensity_divisor` rescales the stored intensity
/// to [0,1] (raw datasets may store 0-255); the default assumes the file
/// is already normalized.
inline PointCloud read_lidar_bin(const std::filesystem::path& path, PointLayout layout,
                                 double intensity_divisor = 1.0) {
  const std::vector<char> bytes = detail::read_file_bytes(path);
  const std::size_t record = layout_floats(layout) * sizeof(float);
  if (bytes.size() % record != 0) {
    const std::size_t offset = (bytes.size() / record) * record;
    throw FormatError(path.string() + ": truncated " + layout_name(layout) +
                      " record at byte offset " + std::to_string(offset));
  }
  const std::size_t n = bytes.size() / record;

  PointCloud cloud;
  cloud.positions.reserve(n);
  cloud.intensity.reserve(n);
  if (layout == PointLayout::XYZIR) cloud.ring.reserve(n);
  if (layout == PointLayout::XYZIT) cloud.time_offset.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const char* rec = bytes.data() + i * record;
    const double x = detail::load_f32(rec);
    const double y = detail::load_f32(rec + 4);
    const double z = detail::load_f32(rec + 8);
    if (std::isnan(x) || std::isnan(y) || std::isnan(z))
      throw ValidationError(path.string() + ": NaN coordinate at point " +
                            std::to_string(i));
    cloud.positions.emplace_back(x, y, z);
    cloud.intensity.push_back(detail::load_f32(rec + 12) / intensity_divisor);
    if (layout == PointLayout::XYZIR)
      cloud.ring.push_back(static_cast<int>(detail::load_f32(rec + 16)));
    else if (layout == PointLayout::XYZIT)
      cloud.time_offset.push_back(detail::load_f32(rec + 16));
  }
  cloud.validate();
  return cloud;
}

/// Write a point binary. Throws ValidationError when the cloud lacks a
/// channel the layout requires. write -> read is the identity on bytes.
inline void write_lidar_bin(const PointCloud& cloud, PointLayout layout,
                            const std::filesystem::path& path,
                            double intensity_divisor = 1.0) {
  if (!cloud.has_intensity() && !cloud.empty())
    throw ValidationError("layout " + layout_name(layout) +
                          " requires an intensity channel");
  if (layout == PointLayout::XYZIR && !cloud.has_ring() && !cloud.empty())
    throw ValidationError("layout XYZIR requires a ring channel");
  if (layout == PointLayout::XYZIT && !cloud.has_time() && !cloud.empty())
    throw ValidationError("layout XYZIT requires a time_offset channel");
  cloud.validate();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  auto put = [&out](float v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    put(static_cast<float>(cloud.positions[i].x()));
    put(static_cast<float>(cloud.positions[i].y()));
    put(static_cast<float>(cloud.positions[i].z()));
    put(static_cast<float>(cloud.intensity[i] * intensity_divisor));
    if (layout == PointLayout::XYZIR)
      put(static_cast<float>(cloud.ring[i]));
    else if (layout == PointLayout::XYZIT)
      put(static_cast<float>(cloud.time_offset[i]));
  }
  if (!out) throw FormatError("short write: " + path.string());
}

// ---------------------------------------------------------------------------
// PLY

namespace detail {

struct PlyProperty {
  std::string name;
  std::string type;
};

inline std::size_t ply_type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw FormatError("unsupported PLY property type: " + type);
}

inline double ply_read_scalar(const char* p, const std::string& type) {
  if (type == "float" || type == "float32") return load_f32(p);
  if (type == "double" || type == "float64") {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  if (type == "uchar" || type == "uint8")
    return static_cast<double>(*reinterpret_cast<const unsigned char*>(p));
  if (type == "char" || type == "int8")
    return static_cast<double>(*reinterpret_cast<const signed char*>(p));
  if (type == "short" || type == "int16") {
    std::int16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (type == "ushort" || type == "uint16") {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (type == "int" || type == "int32") {
    std::int32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (type == "uint" || type == "uint32") {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  throw FormatError("unsupported PLY property type: " + type);
}

}  // namespace detail

/// Read a PLY vertex cloud with x, y, z and red, green, blue properties.
/// ASCII and binary-little-endian encodings are accepted; 8-bit colors map
/// to [0,1] by division by 255. Extra scalar properties are skipped.
inline PointCloud read_ply_rgb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") throw FormatError(path.string() + ": missing ply magic");

  bool ascii = false;
  bool have_format = false;
  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  std::vector<detail::PlyProperty> props;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string enc;
      ls >> enc;
      if (enc == "ascii")
        ascii = true;
      else if (enc == "binary_little_endian")
        ascii = false;
      else
        throw FormatError(path.string() + ": unsupported PLY encoding " + enc);
      have_format = true;
    } else if (tok == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = count;
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      if (type == "list")
        throw FormatError(path.string() + ": list properties on vertices unsupported");
      props.push_back({name, type});
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!have_format) throw FormatError(path.string() + ": missing format line");

  auto find_prop = [&](const std::string& name) {
    for (std::size_t i = 0; i < props.size(); ++i)
      if (props[i].name == name) return static_cast<long>(i);
    return -1L;
  };
  const long ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
  const long ir = find_prop("red"), ig = find_prop("green"), ib = find_prop("blue");
  if (ix < 0 || iy < 0 || iz < 0)
    throw FormatError(path.string() + ": PLY vertex element lacks x/y/z");
  if (ir < 0 || ig < 0 || ib < 0)
    throw FormatError(path.string() + ": PLY vertex element lacks red/green/blue");

  const bool color_is_byte = detail::ply_type_size(props[ir].type) == 1;

  PointCloud cloud;
  cloud.positions.reserve(vertex_count);
  cloud.rgb.reserve(vertex_count);

  if (ascii) {
    for (std::size_t v = 0; v < vertex_count; ++v) {
      std::vector<double> vals(props.size());
      for (std::size_t p = 0; p < props.size(); ++p) {
        if (!(in >> vals[p]))
          throw FormatError(path.string() + ": truncated ASCII vertex " +
                            std::to_string(v));
      }
      cloud.positions.emplace_back(vals[ix], vals[iy], vals[iz]);
      const double scale = color_is_byte ? 1.0 / 255.0 : 1.0;
      cloud.rgb.emplace_back(vals[ir] * scale, vals[ig] * scale, vals[ib] * scale);
    }
  } else {
    std::size_t stride = 0;
    std::vector<std::size_t> offsets(props.size());
    for (std::size_t p = 0; p < props.size(); ++p) {
      offsets[p] = stride;
      stride += detail::ply_type_size(props[p].type);
    }
    std::vector<char> rec(stride);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (!in.read(rec.data(), static_cast<std::streamsize>(stride)))
        throw FormatError(path.string() + ": truncated binary vertex " +
                          std::to_string(v));
      auto val = [&](long p) {
        return detail::ply_read_scalar(rec.data() + offsets[p], props[p].type);
      };
      cloud.positions.emplace_back(val(ix), val(iy), val(iz));
      const double scale = color_is_byte ? 1.0 / 255.0 : 1.0;
      cloud.rgb.emplace_back(val(ir) * scale, val(ig) * scale, val(ib) * scale);
    }
  }
  return cloud;
}

/// Write a binary-little-endian PLY with float positions and uchar colors.
inline void write_ply_rgb(const PointCloud& cloud, const std::filesystem::path& path) {
  if (!cloud.has_rgb() && !cloud.empty())
    throw ValidationError("write_ply_rgb requires an rgb channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const float v = static_cast<float>(cloud.positions[i][a]);
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
    for (int a = 0; a < 3; ++a) {
      const double c = std::clamp(cloud.rgb[i][a], 0.0, 1.0);
      const unsigned char b = static_cast<unsigned char>(std::lround(c * 255.0));
      out.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
  if (!out) throw FormatError("short write: " + path.string());
}

// ---------------------------------------------------------------------------
// Box annotations: one `class cx cy cz dx dy dz yaw` line per box,
// '#' starts a comment.

inline std::vector<Box3D> read_boxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::vector<Box3D> boxes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Box3D box;
    if (!(ls >> box.class_label)) continue;  // blank line
    if (!(ls >> box.center.x() >> box.center.y() >> box.center.z() >>
          box.size.x() >> box.size.y() >> box.size.z() >> box.yaw))
      throw FormatError(path.string() + ": malformed box at line " +
                        std::to_string(line_no));
    box.yaw = normalize_yaw(box.yaw);
    box.validate();
    boxes.push_back(std::move(box));
  }
  return boxes;
}

inline void write_boxes(const std::vector<Box3D>& boxes,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out << "# class cx cy cz dx dy dz yaw\n";
  for (const auto& b : boxes) {
    out << b.class_label << ' ' << detail::format_double(b.center.x()) << ' '
        << detail::format_double(b.center.y()) << ' '
        << detail::format_double(b.center.z()) << ' '
        << detail::format_double(b.size.x()) << ' '
        << detail::format_double(b.size.y()) << ' '
        << detail::format_double(b.size.z()) << ' '
        << detail::format_double(b.yaw) << '\n';
  }
}

}  // namespace lidaraug
