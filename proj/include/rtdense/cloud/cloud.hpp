#pragma once

#include <filesystem>
#include <vector>

#include "rtdense/core/types.hpp"
#include "rtdense/fusion/fusion.hpp"

namespace rtdense::cloud {

/// Colored world-frame point set. Colors and confidences, when present, run
/// parallel to the points.
struct PointCloud {
  std::vector<Eigen::Vector3f> points;
  std::vector<Rgb8> colors;
  std::vector<float> confidences;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_confidences() const { return !confidences.empty(); }
};

/// Backprojects every valid depth pixel into the world frame, sampling the
/// color at the same pixel. Throws std::invalid_argument on size mismatch.
PointCloud depth_to_points(const fusion::DepthFrame& frame, const ColorImage& color,
                           const Intrinsics& intr);

/// Concatenation, a then b. Color/confidence attributes survive only when
/// both inputs carry them.
PointCloud merge(const PointCloud& a, const PointCloud& b);

/// One point per occupied voxel: centroid position, averaged color and
/// confidence, emitted in sorted voxel-key order so the result is
/// deterministic.
PointCloud voxel_downsample(const PointCloud& pc, double voxel_m);

/// Binary little-endian PLY with float32 x/y/z and uchar red/green/blue
/// (plus float32 confidence when present).
void write_ply(const PointCloud& pc, const std::filesystem::path& path);

/// Accepts binary_little_endian and ascii PLYs; unknown vertex properties of
/// known scalar types are skipped. Malformed input raises an error naming the
/// offending element.
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace rtdense::cloud
