#include <fstream>

#include "rtdense/pipeline/pipeline.hpp"

namespace rtdense::pipeline {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void PipelineConfig::finalize() {
  if (dataset_dir.empty())
    throw std::invalid_argument("pipeline: dataset directory not set");
  if (!std::filesystem::is_directory(dataset_dir))
    throw std::runtime_error("pipeline: dataset directory does not exist: " +
                             dataset_dir.string());
  if (calib_path.empty()) calib_path = dataset_dir / "calib.txt";
  if (poses_path.empty()) poses_path = dataset_dir / "poses.txt";
  for (const auto& p : {calib_path, poses_path}) {
    if (!std::filesystem::exists(p))
      throw std::runtime_error("pipeline: missing input file: " + p.string());
  }
  if (!keyframes_path.empty() && !std::filesystem::exists(keyframes_path))
    throw std::runtime_error("pipeline: missing keyframe list: " +
                             keyframes_path.string());
  if (window_size < 1 || window_size % 2 == 0)
    throw std::invalid_argument("pipeline: window_size must be odd and >= 1");
  stereo.validate();
  if (fusion.epsilon <= 0.0)
    throw std::invalid_argument("pipeline: fusion epsilon must be positive");
  if (fusion.c_thres < 0.0)
    throw std::invalid_argument("pipeline: fusion c_thres must be >= 0");
  if (merged_cloud_voxel_m <= 0.0)
    throw std::invalid_argument("pipeline: merged cloud voxel must be positive");
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());

  std::string line, section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail("malformed section header");
      section = stripped.substr(1, stripped.size() - 2);
      if (section != "stereo" && section != "fusion" && section != "pipeline")
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    try {
      if (section == "stereo") {
        if (key == "d_max") cfg.stereo.d_max = std::stoi(value);
        else if (key == "window_radius") cfg.stereo.window_radius = std::stoi(value);
        else if (key == "p1") cfg.stereo.sgm.p1 = static_cast<std::uint16_t>(std::stoi(value));
        else if (key == "p2") cfg.stereo.sgm.p2 = static_cast<std::uint16_t>(std::stoi(value));
        else if (key == "lr_threshold") cfg.stereo.lr_threshold = std::stof(value);
        else fail("unknown key '" + key + "' in [stereo]");
      } else if (section == "fusion") {
        if (key == "window_size") cfg.window_size = std::stoi(value);
        else if (key == "epsilon") cfg.fusion.epsilon = std::stod(value);
        else if (key == "c_thres") cfg.fusion.c_thres = std::stod(value);
        else fail("unknown key '" + key + "' in [fusion]");
      } else if (section == "pipeline") {
        if (key == "dataset_dir") cfg.dataset_dir = value;
        else if (key == "calib") cfg.calib_path = value;
        else if (key == "poses") cfg.poses_path = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "keyframes") cfg.keyframes_path = value;
        else if (key == "threads") cfg.threads = std::stoi(value);
        else if (key == "pipelined") cfg.pipelined = value == "true" || value == "1";
        else if (key == "pose_tolerance") cfg.pose_tolerance_s = std::stod(value);
        else if (key == "save_raw") cfg.save_raw = value == "true" || value == "1";
        else if (key == "save_confidence") cfg.save_confidence = value == "true" || value == "1";
        else if (key == "save_frame_clouds") cfg.save_frame_clouds = value == "true" || value == "1";
        else if (key == "save_merged_cloud") cfg.save_merged_cloud = value == "true" || value == "1";
        else if (key == "merged_cloud_voxel") cfg.merged_cloud_voxel_m = std::stod(value);
        else fail("unknown key '" + key + "' in [pipeline]");
      } else {
        fail("key outside of a section");
      }
    } catch (const std::invalid_argument&) {
      fail("malformed value for key '" + key + "'");
    }
  }
}

}  // namespace rtdense::pipeline
