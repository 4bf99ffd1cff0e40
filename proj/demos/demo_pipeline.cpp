// End-to-end walkthrough on synthetic data: build a DC-only voxel grid of a
// box-shaped object, extract its colored cloud, fit an intensity calibration,
// lidarize it into a small object bank, and insert the bank entries into a
// synthetic ground scene.

#include <iostream>

#include "lidaraug/lidaraug.hpp"

using namespace lidaraug;

namespace {

ShVoxelGrid make_box_grid() {
  ShVoxelGrid grid;
  grid.nx = 8;
  grid.ny = 4;
  grid.nz = 3;
  grid.voxel_size = 0.5;
  grid.sh_degree = 0;
  // Solid block, gray on top, dark red below. DC coefficient c0 encodes a
  // constant color as c0 * 0.28209479177387814.
  for (std::uint32_t iz = 0; iz < grid.nz; ++iz)
    for (std::uint32_t iy = 0; iy < grid.ny; ++iy)
      for (std::uint32_t ix = 0; ix < grid.nx; ++ix) {
        grid.l_idx.push_back(grid.linear_index(ix, iy, iz));
        grid.density.push_back(1.0);
        const bool top = iz == grid.nz - 1;
        grid.coeffs.push_back(top ? 1.772454 : 2.3);  // red channel
        grid.coeffs.push_back(top ? 1.772454 : 0.2);  // green
        grid.coeffs.push_back(top ? 1.772454 : 0.2);  // blue
      }
  return grid;
}

std::vector<CameraView> make_orbit_views(const ShVoxelGrid& grid) {
  const Vec3 target = grid.origin + 0.5 * grid.voxel_size *
                                        Vec3(grid.nx, grid.ny, grid.nz);
  std::vector<CameraView> views;
  for (int k = 0; k < 6; ++k) {
    const double az = 2.0 * M_PI * k / 6;
    CameraView view;
    view.fx = view.fy = 64.0;
    view.cx = view.cy = 32.0;
    view.height = view.width = 64;
    view.translation = target + 8.0 * Vec3(std::cos(az), std::sin(az), 0.4);
    // Camera z axis looks at the grid center.
    const Vec3 fwd = (target - view.translation).normalized();
    const Vec3 right = fwd.cross(Vec3::UnitZ()).normalized();
    const Vec3 down = fwd.cross(right).normalized();
    view.rotation.col(0) = right;
    view.rotation.col(1) = down;
    view.rotation.col(2) = fwd;
    views.push_back(view);
  }
  return views;
}

IntensityCalibration make_flat_calibration(const PointCloud& colored) {
  // One synthetic pair: the colored cloud against itself with an intensity
  // ramp, enough to exercise the kNN + histogram matching path.
  PointCloud real = colored;
  real.rgb.clear();
  real.intensity.resize(real.size());
  for (std::size_t i = 0; i < real.size(); ++i)
    real.intensity[i] = 0.2 + 0.6 * (i % 100) / 100.0;
  std::map<std::string, std::vector<SamplePair>> samples;
  samples["car"].push_back({colored, real});
  CalibrationFitOptions options;
  options.min_points = std::min<std::size_t>(256, colored.size());
  options.fps_points = options.min_points;
  return fit_calibration(samples, 4, 64, options);
}

LidarFrame make_ground_scene() {
  LidarFrame frame;
  Rng rng(7);
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.uniform(-40.0, 40.0);
    const double y = rng.uniform(-40.0, 40.0);
    frame.points.positions.emplace_back(x, y, 0.02 * rng.gaussian());
    frame.points.intensity.push_back(rng.uniform01());
  }
  return frame;
}

}  // namespace

int main() {
  const ShVoxelGrid grid = make_box_grid();
  const std::vector<CameraView> views = make_orbit_views(grid);
  const PointCloud colored = extract_colored_cloud(grid, views);
  std::cout << "extracted " << colored.size() << " colored points\n";

  const PcaResult aligned = pca_align(colored);
  const IntensityCalibration calibration = make_flat_calibration(aligned.aligned);

  BankSource source;
  source.source_id = "demo_box";
  source.class_label = "car";
  source.dense = aligned.aligned;

  BankGenConfig config;
  config.headings_deg = {-90.0, 0.0, 90.0};
  config.ranges_m = {10.0, 20.0, 30.0};
  config.seed = 11;
  const ObjectBank bank = generate_bank({source}, calibration, config);
  std::cout << "bank entries " << bank.entries.size() << " discarded "
            << bank.discarded << "\n";

  LidarFrame scene = make_ground_scene();
  const GroundEstimate ground = estimate_ground(scene);
  // No map prior: unknown pixels stay feasible, observations refine them.
  const FeasibilityRaster map = FeasibilityRaster::make(51.2, 0.128, {0.0, 0.0}, 1);
  const FeasibilityRaster feasibility = fuse_feasibility(map, ground, scene);

  std::vector<const ObjectBankEntry*> picks;
  for (const auto& entry : bank.entries)
    if (picks.size() < 4) picks.push_back(&entry);
  if (picks.empty()) {
    std::cout << "nothing to place\n";
    return 0;
  }

  PlacementOptions options;
  options.seed = 3;
  PlacementReport report;
  const LidarFrame augmented =
      place_objects(scene, picks, feasibility, ground, options, &report);
  std::cout << "inserted " << report.inserted_count() << " of " << picks.size()
            << ", scene grew " << scene.points.size() << " -> "
            << augmented.points.size() << " points\n";
  for (const auto& outcome : report.outcomes)
    std::cout << "  " << outcome.class_label << " " << outcome.reason << " at ("
              << outcome.box.center.x() << ", " << outcome.box.center.y() << ")\n";
  return 0;
}
