#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "rtdense/core/io.hpp"
#include "rtdense/fusion/fusion.hpp"
#include "rtdense/stereo/stereo.hpp"

namespace rtdense::pipeline {

struct PipelineConfig {
  std::filesystem::path dataset_dir;
  std::filesystem::path calib_path;   // default: dataset_dir/calib.txt
  std::filesystem::path poses_path;   // default: dataset_dir/poses.txt
  std::filesystem::path out_dir = "out";
  std::filesystem::path keyframes_path;  // optional frame-index list

  stereo::StereoConfig stereo;
  fusion::FusionParams fusion;
  int window_size = 3;

  int threads = 0;  // 0 = hardware default
  bool pipelined = true;
  double pose_tolerance_s = 0.02;

  bool save_raw = false;
  bool save_confidence = false;
  bool save_frame_clouds = false;
  bool save_merged_cloud = true;
  double merged_cloud_voxel_m = 0.01;

  /// Resolves defaulted paths and checks invariants (paths exist, window
  /// size odd). Throws std::invalid_argument / std::runtime_error.
  void finalize();
};

/// Reads `key = value` lines under [stereo], [fusion] and [pipeline] sections
/// into the given config; unknown keys raise errors naming the line.
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

struct FrameRecord {
  double timestamp = 0.0;
  std::filesystem::path left_path;
  std::filesystem::path right_path;
  Pose pose;
  std::int64_t frame_id = 0;  // index in timestamp order
};

struct Dataset {
  StereoRig rig;
  std::optional<RectifyMap> rectify_left;
  std::optional<RectifyMap> rectify_right;
  std::vector<FrameRecord> frames;  // timestamp-ordered
  std::size_t skipped_no_pose = 0;
};

/// Enumerates left/ and right/ images (paired by filename, parsed as a
/// timestamp), associates poses by nearest timestamp and reports frames
/// skipped for lack of one. Throws on missing files, unpaired images or
/// malformed pose lines.
Dataset load_dataset(const PipelineConfig& cfg);

/// Single-producer single-consumer bounded queue with blocking push
/// (backpressure, no frame drops).
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(T value) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_ || closed_; });
    if (closed_) throw std::logic_error("push on closed queue");
    queue_.push(std::move(value));
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    T value = std::move(queue_.front());
    queue_.pop();
    not_full_.notify_one();
    return value;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::queue<T> queue_;
  bool closed_ = false;
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
};

/// Per-stage per-frame timings plus totals; stage entries include the I/O
/// done inside that stage.
struct TimingReport {
  std::vector<double> stereo_ms;
  std::vector<double> fusion_ms;
  int input_frames = 0;
  int fused_frames = 0;
  double total_seconds = 0.0;

  double stereo_mean_ms() const;
  double fusion_mean_ms() const;
  double throughput_fps() const;
  std::string table() const;             // human-readable summary
  std::string to_json_string() const;    // machine-readable document
};

struct RunReport {
  TimingReport timing;
  std::vector<std::int64_t> fused_ids;
  std::size_t skipped_no_pose = 0;
  std::size_t merged_cloud_points = 0;
};

/// Runs stereo and fusion as concurrent stages over the dataset (bounded
/// queue, capacity = window size), writing fused depth maps, clouds and
/// timing to the output directory. Sequential mode (pipelined = false)
/// produces bit-identical outputs.
RunReport run_pipeline(const PipelineConfig& cfg);

}  // namespace rtdense::pipeline
