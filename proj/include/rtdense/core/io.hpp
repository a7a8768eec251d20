#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rtdense/core/types.hpp"

namespace rtdense {

/// Calibration file: `key = value` lines for fx, fy, cx, cy, width, height,
/// baseline_m, plus optional rectify_map_left / rectify_map_right paths
/// (resolved relative to the calibration file).
struct Calibration {
  StereoRig rig;
  std::optional<std::filesystem::path> rectify_map_left;
  std::optional<std::filesystem::path> rectify_map_right;
};

Calibration read_calibration(const std::filesystem::path& path);
void write_calibration(const Calibration& calib, const std::filesystem::path& path);

/// One trajectory sample in TUM convention: world-from-camera position and
/// orientation. `timestamp tx ty tz qx qy qz qw` per line.
struct TrajectoryEntry {
  double timestamp = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  /// Camera-from-world pose of this sample.
  Pose to_pose() const {
    Pose pose;
    pose.rotation = orientation.normalized().toRotationMatrix().transpose();
    pose.translation = -(pose.rotation * position);
    return pose;
  }

  static TrajectoryEntry from_pose(double timestamp, const Pose& pose) {
    TrajectoryEntry e;
    e.timestamp = timestamp;
    e.position = pose.center();
    e.orientation = Eigen::Quaterniond(pose.rotation.transpose());
    return e;
  }
};

using Trajectory = std::vector<TrajectoryEntry>;

/// Reads a TUM trajectory, sorted by timestamp. Unparsable lines raise an
/// error naming the line number; '#' comments and blank lines are skipped.
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);

/// PFM ("Pf", grayscale float) with negative scale = little-endian, rows
/// bottom-to-top per the format convention.
void write_pfm(const Image2D<float>& map, const std::filesystem::path& path);
Image2D<float> read_pfm(const std::filesystem::path& path);

GrayImage read_png_gray(const std::filesystem::path& path);
ColorImage read_png_color(const std::filesystem::path& path);
void write_png(const GrayImage& img, const std::filesystem::path& path);
void write_png(const ColorImage& img, const std::filesystem::path& path);

/// Depth rendered as 16-bit grayscale PNG in millimeters (0 = invalid),
/// clamped to the representable range. Inspection format only.
void write_depth_png16(const DepthMap& depth, const std::filesystem::path& path);
Image2D<std::uint16_t> read_png16(const std::filesystem::path& path);

/// Rectify map file: little-endian uint32 width, height, then row-major
/// interleaved float32 (u, v) pairs. The declared source size defaults to the
/// map size on load.
void write_rectify_map(const RectifyMap& map, const std::filesystem::path& path);
RectifyMap read_rectify_map(const std::filesystem::path& path);

}  // namespace rtdense
