#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"
#include "lidaraug/radiance/sh.hpp"

namespace lidaraug {

/// Sparse voxel grid with per-voxel density and SH color coefficients.
/// Records are stored SoA; `coeffs` holds 3*(sh_degree+1)^2 scalars per
/// record, channel-major (all R coefficients, then G, then B).
struct ShVoxelGrid {
  std::uint32_t nx = 0, ny = 0, nz = 0;
  Vec3 origin = Vec3::Zero();
  double voxel_size = 1.0;
  int sh_degree = 0;

  std::vector<std::uint64_t> l_idx;
  std::vector<double> density;
  std::vector<double> coeffs;

  std::size_t record_count() const { return l_idx.size(); }
  std::size_t coeffs_per_channel() const { return sh_count(sh_degree); }
  std::size_t coeffs_per_record() const { return 3 * coeffs_per_channel(); }

  std::uint64_t linear_index(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
    return ix + static_cast<std::uint64_t>(nx) * (iy + static_cast<std::uint64_t>(ny) * iz);
  }

  Vec3 voxel_center(std::uint64_t idx) const {
    const std::uint64_t ix = idx % nx;
    const std::uint64_t iy = (idx / nx) % ny;
    const std::uint64_t iz = idx / (static_cast<std::uint64_t>(nx) * ny);
    return origin + voxel_size * Vec3(static_cast<double>(ix) + 0.5,
                                      static_cast<double>(iy) + 0.5,
                                      static_cast<double>(iz) + 0.5);
  }

  /// Record slot for a spatial index, or npos when the voxel is empty.
  /// The lookup cache is lazily built and not thread safe; call validate()
  /// (or any find) once before sharing the grid across threads.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(std::uint64_t idx) const {
    ensure_lookup();
    const auto it = lookup_.find(idx);
    return it == lookup_.end() ? npos : it->second;
  }

  const double* record_coeffs(std::size_t slot) const {
    return coeffs.data() + slot * coeffs_per_record();
  }

  void validate() const {
    // Records may have changed since the last lookup; rebuild on next find.
    lookup_.clear();
    if (nx == 0 || ny == 0 || nz == 0)
      throw ValidationError("ShVoxelGrid: zero dimension");
    if (voxel_size <= 0.0) throw ValidationError("ShVoxelGrid: voxel_size must be > 0");
    if (sh_degree < 0 || sh_degree > 2)
      throw ValidationError("ShVoxelGrid: sh_degree must be 0..2");
    if (density.size() != l_idx.size())
      throw ValidationError("ShVoxelGrid: density/l_idx length mismatch");
    if (coeffs.size() != l_idx.size() * coeffs_per_record())
      throw ValidationError("ShVoxelGrid: coefficient count mismatch");
    const std::uint64_t total = static_cast<std::uint64_t>(nx) * ny * nz;
    std::unordered_map<std::uint64_t, bool> seen;
    seen.reserve(l_idx.size());
    for (std::size_t i = 0; i < l_idx.size(); ++i) {
      if (l_idx[i] >= total)
        throw ValidationError("ShVoxelGrid: l_idx " + std::to_string(l_idx[i]) +
                              " outside dims at record " + std::to_string(i));
      if (!seen.emplace(l_idx[i], true).second)
        throw ValidationError("ShVoxelGrid: duplicate l_idx " + std::to_string(l_idx[i]));
      if (density[i] < 0.0)
        throw ValidationError("ShVoxelGrid: negative density at record " +
                              std::to_string(i));
    }
  }

 private:
  mutable std::unordered_map<std::uint64_t, std::size_t> lookup_;
  void ensure_lookup() const {
    if (lookup_.size() == l_idx.size()) return;
    lookup_.clear();
    lookup_.reserve(l_idx.size());
    for (std::size_t i = 0; i < l_idx.size(); ++i) lookup_[l_idx[i]] = i;
  }
};

// ---------------------------------------------------------------------------
// Binary format: magic "SHVG", u32 version, u32 nx ny nz, f32 origin x y z,
// f32 voxel_size, u32 sh_degree, u64 record count, then per record
// u64 l_idx, f32 density, f32 coefficients (channel-major). Little-endian.

namespace detail {

template <typename T>
void write_raw(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path, const char* what) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw FormatError(path + ": truncated reading " + what);
  return v;
}

}  // namespace detail

inline constexpr std::uint32_t kShvgVersion = 1;

inline void write_voxel_grid(const ShVoxelGrid& grid, const std::filesystem::path& path) {
  grid.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out.write("SHVG", 4);
  detail::write_raw<std::uint32_t>(out, kShvgVersion);
  detail::write_raw<std::uint32_t>(out, grid.nx);
  detail::write_raw<std::uint32_t>(out, grid.ny);
  detail::write_raw<std::uint32_t>(out, grid.nz);
  for (int a = 0; a < 3; ++a)
    detail::write_raw<float>(out, static_cast<float>(grid.origin[a]));
  detail::write_raw<float>(out, static_cast<float>(grid.voxel_size));
  detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(grid.sh_degree));
  detail::write_raw<std::uint64_t>(out, grid.record_count());
  for (std::size_t i = 0; i < grid.record_count(); ++i) {
    detail::write_raw<std::uint64_t>(out, grid.l_idx[i]);
    detail::write_raw<float>(out, static_cast<float>(grid.density[i]));
    const double* c = grid.record_coeffs(i);
    for (std::size_t k = 0; k < grid.coeffs_per_record(); ++k)
      detail::write_raw<float>(out, static_cast<float>(c[k]));
  }
  if (!out) throw FormatError("short write: " + path.string());
}

inline ShVoxelGrid read_voxel_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SHVG", 4) != 0)
    throw FormatError(path.string() + ": missing SHVG magic");
  const auto version = detail::read_raw<std::uint32_t>(in, path.string(), "version");
  if (version != kShvgVersion)
    throw FormatError(path.string() + ": unsupported SHVG version " +
                      std::to_string(version));
  ShVoxelGrid grid;
  grid.nx = detail::read_raw<std::uint32_t>(in, path.string(), "nx");
  grid.ny = detail::read_raw<std::uint32_t>(in, path.string(), "ny");
  grid.nz = detail::read_raw<std::uint32_t>(in, path.string(), "nz");
  for (int a = 0; a < 3; ++a)
    grid.origin[a] = detail::read_raw<float>(in, path.string(), "origin");
  grid.voxel_size = detail::read_raw<float>(in, path.string(), "voxel_size");
  grid.sh_degree =
      static_cast<int>(detail::read_raw<std::uint32_t>(in, path.string(), "sh_degree"));
  if (grid.sh_degree < 0 || grid.sh_degree > 2)
    throw FormatError(path.string() + ": sh_degree out of range");
  const auto count = detail::read_raw<std::uint64_t>(in, path.string(), "record count");
  grid.l_idx.reserve(count);
  grid.density.reserve(count);
  grid.coeffs.reserve(count * grid.coeffs_per_record());
  for (std::uint64_t i = 0; i < count; ++i) {
    grid.l_idx.push_back(detail::read_raw<std::uint64_t>(in, path.string(), "l_idx"));
    grid.density.push_back(detail::read_raw<float>(in, path.string(), "density"));
    for (std::size_t k = 0; k < grid.coeffs_per_record(); ++k)
      grid.coeffs.push_back(detail::read_raw<float>(in, path.string(), "coefficient"));
  }
  grid.validate();
  return grid;
}

}  // namespace lidaraug
