#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/core/errors.hpp"
#include "lidaraug/core/types.hpp"

namespace lidaraug {

/// Pinhole camera with a camera-to-world rigid pose. Camera frame is
/// x-right, y-down, z-forward; pixel (u,v) indexes column u, row v.
struct CameraView {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int height = 0, width = 0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // camera -> world
  Vec3 translation = Vec3::Zero();                         // camera origin in world

  void validate() const {
    if (fx <= 0 || fy <= 0)
      throw ValidationError("CameraView: focal lengths must be > 0");
    if (height <= 0 || width <= 0)
      throw ValidationError("CameraView: image size must be positive");
    const Eigen::Matrix3d residual =
        rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
    if (residual.cwiseAbs().maxCoeff() > 1e-6)
      throw ValidationError("CameraView: rotation not orthonormal within 1e-6");
  }

  /// World-frame unit ray through the center of pixel (u,v).
  Vec3 pixel_ray(int u, int v) const {
    const Vec3 cam((u + 0.5 - cx) / fx, (v + 0.5 - cy) / fy, 1.0);
    return (rotation * cam).normalized();
  }
};

/// Text list: one view per line,
/// `fx fy cx cy H W r11 r12 r13 r21 r22 r23 r31 r32 r33 tx ty tz`.
inline std::vector<CameraView> read_camera_views(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path.string());
  std::vector<CameraView> views;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    CameraView view;
    if (!(ls >> view.fx)) continue;  // blank line
    if (!(ls >> view.fy >> view.cx >> view.cy >> view.height >> view.width))
      throw FormatError(path.string() + ": malformed view at line " +
                        std::to_string(line_no));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (!(ls >> view.rotation(r, c)))
          throw FormatError(path.string() + ": malformed rotation at line " +
                            std::to_string(line_no));
    if (!(ls >> view.translation.x() >> view.translation.y() >> view.translation.z()))
      throw FormatError(path.string() + ": malformed translation at line " +
                        std::to_string(line_no));
    view.validate();
    views.push_back(view);
  }
  return views;
}

inline void write_camera_views(const std::vector<CameraView>& views,
                               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path.string());
  out << "# fx fy cx cy H W r11..r33 tx ty tz\n";
  out.precision(17);
  for (const auto& v : views) {
    out << v.fx << ' ' << v.fy << ' ' << v.cx << ' ' << v.cy << ' ' << v.height << ' '
        << v.width;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << ' ' << v.rotation(r, c);
    out << ' ' << v.translation.x() << ' ' << v.translation.y() << ' '
        << v.translation.z() << '\n';
  }
}

}  // namespace lidaraug
