// Command-line front end: extract / build-bank / augment / eval.
// Exit codes: 0 success, 2 malformed or unreadable input file, 3 any other
// pipeline error. Log level comes from the PGT_LOG environment variable.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lidaraug/lidaraug.hpp"

namespace fs = std::filesystem;
using namespace lidaraug;

namespace {

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw FormatError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (values.empty()) throw FormatError(std::string(what) + ": empty list");
  return values;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw FormatError("cannot open file: " + path);
}

PointLayout layout_flag(const std::string& name) { return layout_from_name(name); }

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::string grid_path, views_path, out_path;
  double step = -1.0;        // <= 0: voxel_size / 2
  double density_min = 0.0;
  int jobs = 1;
};

int run_extract(const ExtractArgs& args) {
  require_file(args.grid_path);
  require_file(args.views_path);
  const ShVoxelGrid grid = read_voxel_grid(args.grid_path);
  const std::vector<CameraView> views = read_camera_views(args.views_path);
  log_info("extract: " + std::to_string(grid.record_count()) + " voxels, " +
           std::to_string(views.size()) + " views");
  const PointCloud cloud =
      extract_colored_cloud(grid, views, args.step, args.density_min, args.jobs);
  write_ply_rgb(cloud, args.out_path);
  std::cout << "extracted " << cloud.size() << " points -> " << args.out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// build-bank

struct BuildBankArgs {
  std::string sources_path, calibration_path, out_dir;
  std::string headings_deg, ranges_m;  // comma lists; empty = defaults
  std::uint64_t seed = 0;
  std::size_t min_points = 16;
  int jobs = 1;
};

std::vector<BankSource> read_bank_sources(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot open file: " + manifest_path.string());
  const fs::path base = manifest_path.parent_path();
  std::vector<BankSource> sources;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string class_label, source_id, ply_path;
    int front = 1;
    if (!(ls >> class_label)) continue;
    if (!(ls >> source_id >> ply_path >> front))
      throw FormatError(manifest_path.string() + ": malformed source at line " +
                        std::to_string(line_no));
    BankSource source;
    source.source_id = source_id;
    source.class_label = class_label;
    source.front_flag = front != 0;
    const fs::path resolved =
        fs::path(ply_path).is_absolute() ? fs::path(ply_path) : base / ply_path;
    source.dense = pca_align(read_ply_rgb(resolved)).aligned;
    sources.push_back(std::move(source));
  }
  return sources;
}

int run_build_bank(const BuildBankArgs& args) {
  require_file(args.sources_path);
  require_file(args.calibration_path);
  const std::vector<BankSource> sources = read_bank_sources(args.sources_path);
  const IntensityCalibration calibration = read_calibration(args.calibration_path);

  BankGenConfig config;
  if (!args.headings_deg.empty())
    config.headings_deg = parse_double_list(args.headings_deg, "--headings");
  if (!args.ranges_m.empty())
    config.ranges_m = parse_double_list(args.ranges_m, "--ranges");
  config.seed = args.seed;
  config.min_points = args.min_points;
  config.jobs = args.jobs;

  log_info("build-bank: " + std::to_string(sources.size()) + " sources, " +
           std::to_string(config.headings_deg.size()) + " headings, " +
           std::to_string(config.ranges_m.size()) + " ranges");
  const ObjectBank bank = generate_bank(sources, calibration, config);
  write_bank(bank, args.out_dir);
  std::cout << "headings " << config.headings_deg.size() << " ranges "
            << config.ranges_m.size() << "\n"
            << "entries " << bank.entries.size() << " discarded " << bank.discarded
            << " -> " << args.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentArgs {
  std::string frame_path, boxes_path, layout = "xyzi";
  std::string frames_list;  // batch mode: lines `frame boxes out_prefix`
  std::string bank_dir, gt_db_dir, map_path;
  std::string mix = "1:1";
  double max_dist = 54.0;
  std::size_t insert = 5;
  std::string classes;  // comma list filter
  bool occlusion = false;
  bool use_bandit = false;
  std::string bandit_state;
  int sweeps = 1;
  double sweep_dt = 0.05, sweep_speed = 0.0, sweep_yaw_rate = 0.0;
  std::uint64_t seed = 0;
  std::string out_frame, out_boxes, report_path;
  std::string out_dir = ".";
  int jobs = 1;
};

struct AugmentContext {
  ObjectBank bank;
  ObjectBank gt_db;  // may be empty
  std::optional<FeasibilityRaster> map_raster;
  std::optional<BanditGrid> bandit;
  MixRatio mix;
  std::vector<std::string> class_filter;
};

std::vector<const ObjectBankEntry*> draw_entries(const AugmentContext& ctx,
                                                 const AugmentArgs& args, Rng& rng) {
  // Range buckets beyond the distance threshold never leave the bank.
  auto usable = [&](const ObjectBankEntry& e) {
    if (e.range_m > args.max_dist) return false;
    if (ctx.class_filter.empty()) return true;
    return std::find(ctx.class_filter.begin(), ctx.class_filter.end(),
                     e.class_label) != ctx.class_filter.end();
  };
  std::vector<const ObjectBankEntry*> bank_pool, gt_pool;
  for (const auto& e : ctx.bank.entries)
    if (usable(e)) bank_pool.push_back(&e);
  for (const auto& e : ctx.gt_db.entries)
    if (usable(e)) gt_pool.push_back(&e);

  MixRatio mix = ctx.mix;
  if (gt_pool.empty() && mix.gt > 0.0) {
    log_info("augment: GT database empty, drawing from the bank only");
    mix.gt = 0.0;
    mix.pgt = 1.0;
  }
  if (bank_pool.empty() && mix.pgt > 0.0 && !gt_pool.empty()) {
    mix.pgt = 0.0;
    mix.gt = 1.0;
  }
  if (bank_pool.empty() && gt_pool.empty())
    throw ValidationError("augment: no usable entries within --max-dist");

  std::vector<const ObjectBankEntry*> drawn;
  for (std::size_t i = 0; i < args.insert; ++i) {
    const MixedDraw d = sample_mixed(gt_pool.size(), bank_pool.size(), mix, rng);
    drawn.push_back(d.from_gt ? gt_pool[d.index] : bank_pool[d.index]);
  }
  return drawn;
}

void augment_one(const AugmentContext& ctx, const AugmentArgs& args,
                 const fs::path& frame_path, const fs::path& boxes_path,
                 const fs::path& out_frame, const fs::path& out_boxes,
                 const fs::path& report_path, std::uint64_t seed) {
  LidarFrame frame;
  frame.points = read_lidar_bin(frame_path, layout_flag(args.layout));
  if (!boxes_path.empty()) frame.boxes = read_boxes(boxes_path);

  const SensorConfig sensor;  // nuScenes-like default profile
  const GroundEstimate ground = estimate_ground(frame);

  // Without a map prior every unobserved pixel stays feasible and the
  // observed ground mask does the filtering.
  FeasibilityRaster map_raster =
      ctx.map_raster ? *ctx.map_raster
                     : FeasibilityRaster::make(51.2, 0.128, Vec2::Zero(), 1);
  const FeasibilityRaster feasibility = fuse_feasibility(map_raster, ground, frame);

  Rng rng(seed);
  const std::vector<const ObjectBankEntry*> entries = draw_entries(ctx, args, rng);

  PlacementOptions options;
  options.seed = rng.next_u64();
  options.use_bandit = args.use_bandit;
  options.bandit = ctx.bandit ? &*ctx.bandit : nullptr;
  options.apply_occlusion = args.occlusion;
  options.sensor = sensor;

  PlacementReport report;
  LidarFrame augmented = place_objects(frame, entries, feasibility, ground, options,
                                       &report);

  PointLayout out_layout = PointLayout::XYZI;
  if (args.sweeps > 1) {
    // Past sweep copies of each inserted object, stacked by time offset.
    // Ring indices do not survive the layout change.
    out_layout = PointLayout::XYZIT;
    augmented.points.ring.clear();
    augmented.points.time_offset.assign(augmented.points.size(), 0.0);
    const SweepTrajectory trajectory{args.sweep_speed, args.sweep_yaw_rate};
    for (const auto& outcome : report.outcomes) {
      if (!outcome.inserted) continue;
      const ObjectBankEntry& entry = *entries[outcome.entry_index];
      PointCloud placed;
      const Eigen::Matrix3d rot = yaw_rotation(outcome.box.yaw);
      for (std::size_t i = 0; i < entry.points.size(); ++i) {
        placed.positions.push_back(rot * entry.points.positions[i] +
                                   outcome.box.center);
        placed.intensity.push_back(entry.points.intensity[i]);
      }
      const PointCloud stacked =
          virtual_sweeps(placed, outcome.box, trajectory, args.sweeps, args.sweep_dt);
      for (std::size_t i = placed.size(); i < stacked.size(); ++i)
        augmented.points.append_from(stacked, i);
    }
  }

  write_lidar_bin(augmented.points, out_layout, out_frame);
  write_boxes(augmented.boxes, out_boxes);
  if (!report_path.empty()) write_placement_report(report, report_path);
  std::ostringstream line;
  line << frame_path.string() << ": inserted " << report.inserted_count()
       << " skipped " << report.skipped_count() << " -> " << out_frame.string()
       << "\n";
  std::cout << line.str();
}

int run_augment(const AugmentArgs& args) {
  require_file(args.bank_dir + "/manifest");
  AugmentContext ctx;
  ctx.bank = read_bank(args.bank_dir);
  if (!args.gt_db_dir.empty()) {
    require_file(args.gt_db_dir + "/manifest");
    ctx.gt_db = read_bank(args.gt_db_dir);
  }
  if (!args.map_path.empty()) {
    require_file(args.map_path);
    ctx.map_raster = read_feasibility_pgm(args.map_path);
  }
  if (!args.bandit_state.empty()) {
    require_file(args.bandit_state);
    ctx.bandit = read_bandit_grid(args.bandit_state);
  } else if (args.use_bandit) {
    ctx.bandit = BanditGrid::make();
  }
  ctx.mix = parse_mix_ratio(args.mix);
  if (!args.classes.empty()) {
    std::stringstream ss(args.classes);
    std::string item;
    while (std::getline(ss, item, ',')) ctx.class_filter.push_back(item);
  }

  if (args.frames_list.empty()) {
    if (args.frame_path.empty())
      throw ValidationError("augment: --frame or --frames required");
    require_file(args.frame_path);
    if (!args.boxes_path.empty()) require_file(args.boxes_path);
    const std::string out_frame =
        args.out_frame.empty() ? "augmented.bin" : args.out_frame;
    const std::string out_boxes =
        args.out_boxes.empty() ? "augmented_boxes.txt" : args.out_boxes;
    augment_one(ctx, args, args.frame_path, args.boxes_path, out_frame, out_boxes,
                args.report_path, args.seed);
    return 0;
  }

  // Batch mode: one line per frame `frame_bin boxes_txt out_prefix`.
  require_file(args.frames_list);
  std::ifstream list(args.frames_list);
  struct Job {
    fs::path frame, boxes, prefix;
  };
  std::vector<Job> jobs_list;
  std::string line;
  std::size_t line_no = 0;
  const fs::path base = fs::path(args.frames_list).parent_path();
  while (std::getline(list, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string frame, boxes, prefix;
    if (!(ls >> frame)) continue;
    if (!(ls >> boxes >> prefix))
      throw FormatError(args.frames_list + ": malformed row at line " +
                        std::to_string(line_no));
    auto resolve = [&](const std::string& p) {
      return fs::path(p).is_absolute() ? fs::path(p) : base / p;
    };
    jobs_list.push_back({resolve(frame), resolve(boxes), fs::path(args.out_dir) / prefix});
  }
  for (const auto& job : jobs_list) {
    require_file(job.frame.string());
    require_file(job.boxes.string());
  }

  parallel_for(jobs_list.size(), args.jobs, [&](std::size_t i) {
    const Job& job = jobs_list[i];
    augment_one(ctx, args, job.frame, job.boxes, job.prefix.string() + ".bin",
                job.prefix.string() + "_boxes.txt", job.prefix.string() + "_report.txt",
                Rng::mix(args.seed, i));
  });
  std::cout << "augmented " << jobs_list.size() << " frames -> " << args.out_dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string set_a_dir, set_b_dir;
  double lambda = 0.1;
  std::size_t patches = 16;
  std::string out_path;   // empty: stdout
  std::string dump_path;  // optional per-class machine-readable dump
};

int run_eval(const EvalArgs& args) {
  require_file(args.set_a_dir + "/manifest");
  require_file(args.set_b_dir + "/manifest");
  const ObjectBank set_a = read_bank(args.set_a_dir);
  const ObjectBank set_b = read_bank(args.set_b_dir);

  std::map<std::string, std::vector<const ObjectBankEntry*>> by_class_a, by_class_b;
  for (const auto& e : set_a.entries) by_class_a[e.class_label].push_back(&e);
  for (const auto& e : set_b.entries) by_class_b[e.class_label].push_back(&e);

  std::ostringstream report;
  report << "# per-class squared Wasserstein distance (hand-crafted features)\n";
  std::map<std::string, double> frechet_by_class;

  std::vector<std::string> all_classes;
  for (const auto& [label, v] : by_class_a) all_classes.push_back(label);
  for (const auto& [label, v] : by_class_b)
    if (!by_class_a.count(label)) all_classes.push_back(label);
  std::sort(all_classes.begin(), all_classes.end());

  for (const auto& label : all_classes) {
    const auto ita = by_class_a.find(label);
    const auto itb = by_class_b.find(label);
    if (ita == by_class_a.end() || itb == by_class_b.end() ||
        ita->second.size() < 2 || itb->second.size() < 2) {
      report << "class " << label << " frechet n/a\n";
      continue;
    }
    auto features = [](const std::vector<const ObjectBankEntry*>& entries) {
      std::vector<Eigen::VectorXd> f;
      f.reserve(entries.size());
      for (const auto* e : entries) f.push_back(featurize(e->points, e->box));
      return f;
    };
    const double d =
        frechet_distance(summarize(features(ita->second)), summarize(features(itb->second)));
    frechet_by_class[label] = d;
    report << "class " << label << " frechet " << d << "\n";

    // Mean group-intensity distance over index-paired entries.
    const std::size_t pairs = std::min(ita->second.size(), itb->second.size());
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const auto& ea = *ita->second[i];
      const auto& eb = *itb->second[i];
      if (ea.points.size() < args.patches || eb.points.size() < args.patches) continue;
      sum += group_intensity_distance(ea.points, eb.points, args.patches, args.lambda);
      ++used;
    }
    if (used > 0)
      report << "class " << label << " group_intensity_mean " << sum / used << "\n";
  }

  std::vector<Box3D> boxes_a, boxes_b;
  for (const auto& e : set_a.entries) {
    Box3D b = e.box;
    b.class_label = e.class_label;
    boxes_a.push_back(b);
  }
  for (const auto& e : set_b.entries) {
    Box3D b = e.box;
    b.class_label = e.class_label;
    boxes_b.push_back(b);
  }
  report << "# class balance, set A\n";
  const ClassBalance balance_a = class_balance(boxes_a);
  const ClassBalance balance_b = class_balance(boxes_b);
  print_class_balance(report, balance_a, &balance_b);

  if (args.out_path.empty()) {
    std::cout << report.str();
  } else {
    std::ofstream out(args.out_path);
    if (!out) throw FormatError("cannot open file for writing: " + args.out_path);
    out << report.str();
    std::cout << "report -> " << args.out_path << "\n";
  }
  if (!args.dump_path.empty()) {
    std::ofstream dump(args.dump_path);
    if (!dump) throw FormatError("cannot open file for writing: " + args.dump_path);
    dump.precision(17);
    for (const auto& [label, d] : frechet_by_class)
      dump << label << ' ' << d << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-LiDAR object bank and scene composition toolkit"};
  app.set_config("--config", "", "key=value config file (flags win over file values)");
  app.require_subcommand(1);

  ExtractArgs extract_args;
  auto* extract = app.add_subcommand(
      "extract", "render a colored point cloud out of an SH voxel grid");
  extract->add_option("--grid", extract_args.grid_path, "SHVG voxel grid")->required();
  extract->add_option("--views", extract_args.views_path, "camera view list")
      ->required();
  extract->add_option("--out", extract_args.out_path, "output PLY")->required();
  extract->add_option("--step", extract_args.step,
                      "ray march step in meters (default voxel_size/2)");
  extract->add_option("--density-min", extract_args.density_min,
                      "minimum voxel density");
  extract->add_option("--jobs", extract_args.jobs, "worker threads");

  BuildBankArgs bank_args;
  auto* build_bank =
      app.add_subcommand("build-bank", "lidarize sources over the heading/range grid");
  build_bank->add_option("--sources", bank_args.sources_path,
                         "source manifest: class id ply front_flag")
      ->required();
  build_bank->add_option("--calibration", bank_args.calibration_path,
                         "intensity calibration file")
      ->required();
  build_bank->add_option("--out", bank_args.out_dir, "bank output directory")
      ->required();
  build_bank->add_option("--headings", bank_args.headings_deg,
                         "comma list of headings in degrees");
  build_bank->add_option("--ranges", bank_args.ranges_m,
                         "comma list of ranges in meters");
  build_bank->add_option("--seed", bank_args.seed, "bank generation seed");
  build_bank->add_option("--min-points", bank_args.min_points,
                         "discard entries below this point count");
  build_bank->add_option("--jobs", bank_args.jobs, "worker threads");

  AugmentArgs augment_args;
  auto* augment = app.add_subcommand("augment", "insert bank objects into frames");
  augment->add_option("--frame", augment_args.frame_path, "input point binary");
  augment->add_option("--boxes", augment_args.boxes_path, "input box annotations");
  augment->add_option("--layout", augment_args.layout,
                      "input point layout: xyzi|xyzir|xyzit");
  augment->add_option("--frames", augment_args.frames_list,
                      "batch list: frame boxes out_prefix per line");
  augment->add_option("--bank", augment_args.bank_dir, "object bank directory")
      ->required();
  augment->add_option("--gt-db", augment_args.gt_db_dir,
                      "real object database directory (bank layout)");
  augment->add_option("--map", augment_args.map_path,
                      "feasibility PGM (omit for ground-only mode)");
  augment->add_option("--mix", augment_args.mix, "GT:PGT draw ratio");
  augment->add_option("--max-dist", augment_args.max_dist,
                      "discard bank entries beyond this range");
  augment->add_option("--insert", augment_args.insert, "objects to insert per frame");
  augment->add_option("--classes", augment_args.classes, "comma list class filter");
  augment->add_flag("--occlusion", augment_args.occlusion,
                    "ray-trace mutual occlusion after insertion");
  augment->add_flag("--use-bandit", augment_args.use_bandit,
                    "restrict placement to Thompson-selected cells");
  augment->add_option("--bandit-state", augment_args.bandit_state,
                      "bandit grid state file");
  augment->add_option("--sweeps", augment_args.sweeps, "virtual sweep count");
  augment->add_option("--sweep-dt", augment_args.sweep_dt, "sweep time step");
  augment->add_option("--sweep-speed", augment_args.sweep_speed,
                      "object speed for sweeps, m/s");
  augment->add_option("--sweep-yaw-rate", augment_args.sweep_yaw_rate,
                      "object yaw rate for sweeps, rad/s");
  augment->add_option("--seed", augment_args.seed, "augmentation seed");
  augment->add_option("--out-frame", augment_args.out_frame, "output point binary");
  augment->add_option("--out-boxes", augment_args.out_boxes, "output box file");
  augment->add_option("--report", augment_args.report_path, "placement report path");
  augment->add_option("--out-dir", augment_args.out_dir, "batch output directory");
  augment->add_option("--jobs", augment_args.jobs, "worker threads (batch mode)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "compare two object sets");
  eval->add_option("--set-a", eval_args.set_a_dir, "first set (bank layout)")
      ->required();
  eval->add_option("--set-b", eval_args.set_b_dir, "second set (bank layout)")
      ->required();
  eval->add_option("--lambda", eval_args.lambda, "group intensity distance weight");
  eval->add_option("--patches", eval_args.patches, "ball patches per object");
  eval->add_option("--out", eval_args.out_path, "report path (default stdout)");
  eval->add_option("--dump", eval_args.dump_path, "per-class distance dump path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(extract)) return run_extract(extract_args);
    if (app.got_subcommand(build_bank)) return run_build_bank(bank_args);
    if (app.got_subcommand(augment)) return run_augment(augment_args);
    if (app.got_subcommand(eval)) return run_eval(eval_args);
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
