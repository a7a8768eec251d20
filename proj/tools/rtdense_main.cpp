// Command-line front end: stream reconstruction (`run`), single-pair depth
// (`depth`), synthetic dataset generation (`synth`) and the evaluation
// commands (`eval-depth`, `eval-cloud`, `eval-traj`).

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtdense/cloud/cloud.hpp"
#include "rtdense/core/rectify.hpp"
#include "rtdense/core/threading.hpp"
#include "rtdense/metrics/metrics.hpp"
#include "rtdense/pipeline/pipeline.hpp"
#include "rtdense/synth/synth.hpp"

namespace fs = std::filesystem;
using namespace rtdense;

namespace {

void add_stereo_flags(CLI::App* cmd, stereo::StereoConfig& cfg) {
  cmd->add_option("--d-max", cfg.d_max, "Number of disparity levels");
  cmd->add_option("--window-radius", cfg.window_radius, "SAD window radius");
  cmd->add_option("--p1", cfg.sgm.p1, "SGM small-discontinuity penalty");
  cmd->add_option("--p2", cfg.sgm.p2, "SGM large-discontinuity penalty");
  cmd->add_option("--lr-threshold", cfg.lr_threshold,
                  "Left-right consistency threshold (px)");
}

int cmd_run(const pipeline::PipelineConfig& cfg) {
  const pipeline::RunReport report = pipeline::run_pipeline(cfg);
  std::cout << report.timing.table();
  if (report.skipped_no_pose > 0)
    std::cout << "frames skipped (no pose within tolerance): "
              << report.skipped_no_pose << "\n";
  if (report.merged_cloud_points > 0)
    std::cout << "merged cloud points: " << report.merged_cloud_points << "\n";
  return 0;
}

int cmd_depth(const fs::path& left, const fs::path& right, const fs::path& calib,
              const fs::path& out, const fs::path& conf_out, const fs::path& png_out,
              const stereo::StereoConfig& cfg) {
  const Calibration calibration = read_calibration(calib);
  GrayImage l = read_png_gray(left);
  GrayImage r = read_png_gray(right);
  if (calibration.rectify_map_left)
    l = rectify(l, read_rectify_map(*calibration.rectify_map_left));
  if (calibration.rectify_map_right)
    r = rectify(r, read_rectify_map(*calibration.rectify_map_right));
  const auto [depth, confidence] = stereo::stereo_match(l, r, calibration.rig, cfg);
  write_pfm(depth, out);
  if (!conf_out.empty()) write_pfm(confidence, conf_out);
  if (!png_out.empty()) write_depth_png16(depth, png_out);
  return 0;
}

std::vector<fs::path> pfm_inputs(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".pfm")
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw std::runtime_error("no .pfm files in directory: " + path.string());
    return files;
  }
  return {path};
}

int cmd_eval_depth(const fs::path& pred, const fs::path& ref, const fs::path& json_out) {
  const std::vector<fs::path> pred_files = pfm_inputs(pred);
  const std::vector<fs::path> ref_files = pfm_inputs(ref);
  if (pred_files.size() != ref_files.size())
    throw std::runtime_error("eval-depth: file counts differ between --pred and --ref");

  std::vector<metrics::DepthErrorStats> per_map;
  nlohmann::json maps = nlohmann::json::array();
  for (std::size_t i = 0; i < pred_files.size(); ++i) {
    DepthMap p, r;
    static_cast<Image2D<float>&>(p) = read_pfm(pred_files[i]);
    static_cast<Image2D<float>&>(r) = read_pfm(ref_files[i]);
    const auto result = metrics::depth_abs_error(p, r);
    per_map.push_back(result.stats);
    nlohmann::json entry;
    entry["pred"] = pred_files[i].string();
    entry["ref"] = ref_files[i].string();
    entry["overlap"] = result.stats.overlap_count;
    if (result.stats.defined()) {
      entry["mae_m"] = result.stats.mae;
      entry["median_m"] = result.stats.median;
    } else {
      entry["mae_m"] = "undefined";
      entry["median_m"] = "undefined";
    }
    maps.push_back(entry);
  }

  const metrics::DatasetDepthStats ds = metrics::dataset_depth_stats(per_map);
  if (ds.defined()) {
    std::printf("maps = %zu\n", ds.map_count);
    std::printf("overlap_pixels = %zu\n", ds.pixel_count);
    std::printf("mae_m = %.6f\n", ds.mae);
    std::printf("median_of_medians_m = %.6f\n", ds.median_of_medians);
  } else {
    std::printf("mae_m = undefined\n");
    std::printf("median_of_medians_m = undefined\n");
  }

  if (!json_out.empty()) {
    nlohmann::json j;
    j["per_map"] = maps;
    if (ds.defined()) {
      j["dataset"] = {{"mae_m", ds.mae},
                      {"median_of_medians_m", ds.median_of_medians},
                      {"maps", ds.map_count},
                      {"overlap_pixels", ds.pixel_count}};
    } else {
      j["dataset"] = "undefined";
    }
    std::ofstream(json_out) << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_eval_cloud(const fs::path& source_path, const fs::path& target_path,
                   double threshold, const fs::path& align_src_traj,
                   const fs::path& align_dst_traj, const fs::path& json_out,
                   const fs::path& pr_csv, std::vector<double> pr_thresholds) {
  cloud::PointCloud source = cloud::read_ply(source_path);
  const cloud::PointCloud target = cloud::read_ply(target_path);

  std::string alignment = "none";
  if (!align_src_traj.empty() || !align_dst_traj.empty()) {
    if (align_src_traj.empty() || align_dst_traj.empty())
      throw std::runtime_error(
          "eval-cloud: --align-source-traj and --align-target-traj go together");
    const Trajectory src_traj = read_trajectory(align_src_traj);
    const Trajectory dst_traj = read_trajectory(align_dst_traj);
    const metrics::AteResult ate = metrics::ate_rmse(src_traj, dst_traj, true);
    for (Eigen::Vector3f& p : source.points)
      p = ate.alignment.apply(p.cast<double>()).cast<float>();
    alignment = "sim3-from-trajectories";
  }

  const metrics::CloudMetrics m = metrics::chamfer_metrics(source, target, threshold);
  std::printf("alignment = %s\n", alignment.c_str());
  if (!m.defined) {
    std::printf("metrics = undefined (empty cloud)\n");
  } else {
    std::printf("threshold_m = %.6f\n", m.threshold_m);
    std::printf("accuracy_m = %.6f\n", m.accuracy_m);
    std::printf("completeness_m = %.6f\n", m.completeness_m);
    std::printf("precision_pct = %.3f\n", m.precision_pct);
    std::printf("recall_pct = %.3f\n", m.recall_pct);
  }

  if (!pr_csv.empty()) {
    if (pr_thresholds.empty())
      for (int i = 1; i <= 30; ++i) pr_thresholds.push_back(0.01 * i);
    const auto curve = metrics::precision_recall_curve(source, target, pr_thresholds);
    std::ofstream csv(pr_csv);
    csv << "threshold,precision,recall\n";
    for (const auto& s : curve)
      csv << s.threshold_m << "," << s.precision_pct << "," << s.recall_pct << "\n";
  }

  if (!json_out.empty()) {
    nlohmann::json j;
    j["alignment"] = alignment;
    if (m.defined) {
      j["threshold_m"] = m.threshold_m;
      j["accuracy_m"] = m.accuracy_m;
      j["completeness_m"] = m.completeness_m;
      j["precision_pct"] = m.precision_pct;
      j["recall_pct"] = m.recall_pct;
    } else {
      j["metrics"] = "undefined";
    }
    std::ofstream(json_out) << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_eval_traj(const fs::path& est, const fs::path& ref, bool no_align,
                  double tolerance, const fs::path& json_out) {
  const metrics::AteResult r =
      metrics::ate_rmse(read_trajectory(est), read_trajectory(ref), !no_align, tolerance);
  std::printf("aligned = %s\n", r.aligned ? "sim3" : "none");
  std::printf("pairs = %zu\n", r.pair_count);
  std::printf("ate_rmse_m = %.6f\n", r.rmse_m);
  if (r.aligned) std::printf("sim3_scale = %.9f\n", r.alignment.scale);
  if (!json_out.empty()) {
    nlohmann::json j;
    j["aligned"] = r.aligned;
    j["pairs"] = r.pair_count;
    j["ate_rmse_m"] = r.rmse_m;
    if (r.aligned) j["sim3_scale"] = r.alignment.scale;
    std::ofstream(json_out) << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_synth(const fs::path& out, const std::string& surface, int width, int height,
              int frames, double disparity, double d0, double d1, double near_d,
              double far_d, double step_m, double sigma, double outliers,
              unsigned seed) {
  synth::SyntheticScene scene;
  if (surface == "plane") {
    scene = synth::make_plane_scene(width, height, disparity, frames, step_m);
  } else if (surface == "ramp") {
    scene = synth::make_ramp_scene(width, height, d0, d1, frames, step_m);
  } else if (surface == "step") {
    scene = synth::make_step_scene(width, height, near_d, far_d, frames, step_m);
  } else {
    throw std::runtime_error("synth: unknown surface '" + surface + "'");
  }
  scene.noise.depth_sigma_m = sigma;
  scene.noise.outlier_fraction = outliers;
  scene.noise.seed = seed;
  synth::write_dataset(scene, out);
  std::cout << "wrote " << frames << " frames to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CPU stereo video to fused depth maps and colored point clouds"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline on a dataset");
  pipeline::PipelineConfig run_cfg;
  fs::path run_config_path;
  bool sequential = false;

  // Config file values load first so that explicit flags override them.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string_view(argv[i]) == "--config") {
      run_config_path = argv[i + 1];
      break;
    }
  }
  if (!run_config_path.empty()) {
    try {
      pipeline::apply_config_file(run_cfg, run_config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  run->add_option("dataset", run_cfg.dataset_dir, "Dataset directory");
  run->add_option("--config", run_config_path, "Pipeline config file");
  run->add_option("--out-dir", run_cfg.out_dir, "Output directory");
  run->add_option("--threads", run_cfg.threads, "Thread budget (0 = hardware)");
  run->add_option("--window", run_cfg.window_size, "Fusion window size (odd)");
  run->add_option("--epsilon", run_cfg.fusion.epsilon, "Fusion support radius (m)");
  run->add_option("--c-thres", run_cfg.fusion.c_thres, "Fused-confidence threshold");
  run->add_option("--keyframes", run_cfg.keyframes_path, "Keyframe index list file");
  run->add_option("--merged-cloud-voxel", run_cfg.merged_cloud_voxel_m,
                  "Voxel size (m) for the merged cloud");
  run->add_flag("--sequential", sequential, "Disable stage pipelining");
  run->add_flag("--save-raw", run_cfg.save_raw, "Write pre-fusion depth maps");
  run->add_flag("--save-confidence", run_cfg.save_confidence,
                "Write fused confidence maps");
  run->add_flag("--save-frame-clouds", run_cfg.save_frame_clouds,
                "Write one cloud per fused frame");
  bool no_merged = false;
  run->add_flag("--no-merged-cloud", no_merged, "Skip the merged cloud");
  add_stereo_flags(run, run_cfg.stereo);

  // depth
  auto* depth = app.add_subcommand("depth", "Depth map for one stereo pair");
  fs::path d_left, d_right, d_calib, d_out, d_conf, d_png;
  stereo::StereoConfig d_cfg;
  depth->add_option("--left", d_left, "Left image (PNG)")->required();
  depth->add_option("--right", d_right, "Right image (PNG)")->required();
  depth->add_option("--calib", d_calib, "Calibration file")->required();
  depth->add_option("--out", d_out, "Output depth map (PFM)")->required();
  depth->add_option("--conf", d_conf, "Optional confidence output (PFM)");
  depth->add_option("--png16", d_png, "Optional 16-bit PNG depth (mm)");
  add_stereo_flags(depth, d_cfg);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  fs::path s_out;
  std::string s_surface = "plane";
  int s_width = 320, s_height = 240, s_frames = 10;
  double s_disp = 25.0, s_d0 = 10.0, s_d1 = 40.0, s_near = 35.0, s_far = 15.0;
  double s_step = 0.01, s_sigma = 0.0, s_outliers = 0.0;
  unsigned s_seed = 1;
  synth_cmd->add_option("--out", s_out, "Output dataset directory")->required();
  synth_cmd->add_option("--surface", s_surface, "plane | ramp | step");
  synth_cmd->add_option("--width", s_width, "Image width");
  synth_cmd->add_option("--height", s_height, "Image height");
  synth_cmd->add_option("--frames", s_frames, "Number of frames");
  synth_cmd->add_option("--disparity", s_disp, "Plane disparity (px)");
  synth_cmd->add_option("--ramp-d0", s_d0, "Ramp disparity at left edge (px)");
  synth_cmd->add_option("--ramp-d1", s_d1, "Ramp disparity at right edge (px)");
  synth_cmd->add_option("--near-disparity", s_near, "Step near-plane disparity (px)");
  synth_cmd->add_option("--far-disparity", s_far, "Step far-plane disparity (px)");
  synth_cmd->add_option("--camera-step", s_step, "Camera translation per frame (m)");
  synth_cmd->add_option("--noise-sigma", s_sigma, "Depth noise sigma (m)");
  synth_cmd->add_option("--outlier-fraction", s_outliers, "Outlier fraction [0,1]");
  synth_cmd->add_option("--seed", s_seed, "Noise seed");

  // eval-depth
  auto* eval_depth = app.add_subcommand("eval-depth", "Depth-map error metrics");
  fs::path ed_pred, ed_ref, ed_json;
  eval_depth->add_option("--pred", ed_pred, "Predicted PFM file or directory")->required();
  eval_depth->add_option("--ref", ed_ref, "Reference PFM file or directory")->required();
  eval_depth->add_option("--json", ed_json, "Write JSON report here");

  // eval-cloud
  auto* eval_cloud = app.add_subcommand("eval-cloud", "Point-cloud Chamfer metrics");
  fs::path ec_source, ec_target, ec_json, ec_csv, ec_align_src, ec_align_dst;
  double ec_threshold = 0.1;
  std::vector<double> ec_thresholds;
  eval_cloud->add_option("--source", ec_source, "Source cloud (PLY)")->required();
  eval_cloud->add_option("--target", ec_target, "Target cloud (PLY)")->required();
  eval_cloud->add_option("--threshold", ec_threshold, "Precision/recall threshold (m)");
  eval_cloud->add_option("--align-source-traj", ec_align_src,
                         "Trajectory of the source cloud (enables sim3 pre-alignment)");
  eval_cloud->add_option("--align-target-traj", ec_align_dst,
                         "Trajectory of the target cloud");
  eval_cloud->add_option("--json", ec_json, "Write JSON report here");
  eval_cloud->add_option("--pr-csv", ec_csv, "Write precision/recall curve CSV here");
  eval_cloud->add_option("--pr-thresholds", ec_thresholds,
                         "Curve thresholds (m), increasing");

  // eval-traj
  auto* eval_traj = app.add_subcommand("eval-traj", "Trajectory ATE");
  fs::path et_est, et_ref, et_json;
  bool et_no_align = false;
  double et_tol = 0.02;
  eval_traj->add_option("--est", et_est, "Estimated trajectory (TUM)")->required();
  eval_traj->add_option("--ref", et_ref, "Reference trajectory (TUM)")->required();
  eval_traj->add_flag("--no-align", et_no_align, "Skip sim3 alignment");
  eval_traj->add_option("--tolerance", et_tol, "Timestamp association tolerance (s)");
  eval_traj->add_option("--json", et_json, "Write JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      if (sequential) run_cfg.pipelined = false;
      if (no_merged) run_cfg.save_merged_cloud = false;
      return cmd_run(run_cfg);
    }
    if (depth->parsed())
      return cmd_depth(d_left, d_right, d_calib, d_out, d_conf, d_png, d_cfg);
    if (synth_cmd->parsed())
      return cmd_synth(s_out, s_surface, s_width, s_height, s_frames, s_disp, s_d0,
                       s_d1, s_near, s_far, s_step, s_sigma, s_outliers, s_seed);
    if (eval_depth->parsed()) return cmd_eval_depth(ed_pred, ed_ref, ed_json);
    if (eval_cloud->parsed())
      return cmd_eval_cloud(ec_source, ec_target, ec_threshold, ec_align_src,
                            ec_align_dst, ec_json, ec_csv, ec_thresholds);
    if (eval_traj->parsed())
      return cmd_eval_traj(et_est, et_ref, et_no_align, et_tol, et_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
