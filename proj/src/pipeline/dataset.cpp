#include <algorithm>
#include <cmath>
#include <map>

#include "rtdense/pipeline/pipeline.hpp"

namespace rtdense::pipeline {
namespace {

bool parse_timestamp(const std::filesystem::path& file, double& out) {
  const std::string stem = file.stem().string();
  if (stem.empty()) return false;
  std::size_t consumed = 0;
  try {
    out = std::stod(stem, &consumed);
  } catch (const std::exception&) {
    return false;
  }
  return consumed == stem.size();
}

std::map<double, std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("dataset: missing image directory: " + dir.string());
  std::map<double, std::filesystem::path> images;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext != ".png" && ext != ".PNG") continue;
    double ts = 0.0;
    if (!parse_timestamp(entry.path(), ts))
      throw std::runtime_error("dataset: non-numeric image filename: " +
                               entry.path().string());
    images.emplace(ts, entry.path());
  }
  return images;
}

// Nearest trajectory entry by timestamp; the trajectory is sorted.
const TrajectoryEntry* nearest_pose(const Trajectory& traj, double ts, double tol) {
  const auto it = std::lower_bound(
      traj.begin(), traj.end(), ts,
      [](const TrajectoryEntry& e, double t) { return e.timestamp < t; });
  const TrajectoryEntry* best = nullptr;
  double best_dt = tol;
  if (it != traj.end() && std::abs(it->timestamp - ts) <= best_dt) {
    best = &*it;
    best_dt = std::abs(it->timestamp - ts);
  }
  if (it != traj.begin()) {
    const TrajectoryEntry* prev = &*(it - 1);
    if (std::abs(prev->timestamp - ts) <= best_dt) best = prev;
  }
  return best;
}

}  // namespace

Dataset load_dataset(const PipelineConfig& cfg) {
  Dataset ds;
  const Calibration calib = read_calibration(cfg.calib_path);
  ds.rig = calib.rig;
  if (calib.rectify_map_left)
    ds.rectify_left = read_rectify_map(*calib.rectify_map_left);
  if (calib.rectify_map_right)
    ds.rectify_right = read_rectify_map(*calib.rectify_map_right);

  const auto left = list_images(cfg.dataset_dir / "left");
  const auto right = list_images(cfg.dataset_dir / "right");
  if (left.size() != right.size())
    throw std::runtime_error(
        "dataset: left/right image counts differ (" + std::to_string(left.size()) +
        " vs " + std::to_string(right.size()) + ")");
  if (left.empty()) throw std::runtime_error("dataset: no images found");

  const Trajectory traj = read_trajectory(cfg.poses_path);
  if (traj.empty())
    throw std::runtime_error("dataset: empty trajectory: " + cfg.poses_path.string());

  std::int64_t next_id = 0;
  for (const auto& [ts, left_path] : left) {  // std::map iterates in timestamp order
    const auto rit = right.find(ts);
    if (rit == right.end())
      throw std::runtime_error("dataset: no right image paired with " +
                               left_path.string());
    const TrajectoryEntry* pose = nearest_pose(traj, ts, cfg.pose_tolerance_s);
    if (pose == nullptr) {
      ++ds.skipped_no_pose;
      continue;
    }
    FrameRecord rec;
    rec.timestamp = ts;
    rec.left_path = left_path;
    rec.right_path = rit->second;
    rec.pose = pose->to_pose();
    rec.frame_id = next_id++;
    ds.frames.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace rtdense::pipeline
