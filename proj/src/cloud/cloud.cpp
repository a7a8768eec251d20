#include "rtdense/cloud/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>

#include "rtdense/core/geometry.hpp"
#include "rtdense/core/threading.hpp"

namespace rtdense::cloud {

PointCloud depth_to_points(const fusion::DepthFrame& frame, const ColorImage& color,
                           const Intrinsics& intr) {
  const DepthMap& depth = frame.depth;
  if (!depth.same_size(color))
    throw std::invalid_argument("depth_to_points: color/depth size mismatch");
  if (depth.width != intr.width || depth.height != intr.height)
    throw std::invalid_argument("depth_to_points: intrinsics size mismatch");

  const Eigen::Matrix3d cam_to_world = frame.pose.rotation.transpose();
  const Eigen::Vector3d center = frame.pose.center();

  struct RowPoints {
    std::vector<Eigen::Vector3f> points;
    std::vector<Rgb8> colors;
    std::vector<float> confidences;
  };
  std::vector<RowPoints> rows(depth.height);

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < depth.height; ++y) {
    RowPoints& row = rows[y];
    for (int x = 0; x < depth.width; ++x) {
      const float z = depth.at(x, y);
      if (!DepthMap::is_valid(z)) continue;
      const Eigen::Vector3d world =
          cam_to_world * backproject(x, y, z, intr) + center;
      row.points.emplace_back(world.cast<float>());
      row.colors.push_back(color.at(x, y));
      row.confidences.push_back(frame.confidence.at(x, y));
    }
  }

  PointCloud pc;
  for (const RowPoints& row : rows) {
    pc.points.insert(pc.points.end(), row.points.begin(), row.points.end());
    pc.colors.insert(pc.colors.end(), row.colors.begin(), row.colors.end());
    pc.confidences.insert(pc.confidences.end(), row.confidences.begin(),
                          row.confidences.end());
  }
  return pc;
}

PointCloud merge(const PointCloud& a, const PointCloud& b) {
  PointCloud out;
  out.points.reserve(a.size() + b.size());
  out.points.insert(out.points.end(), a.points.begin(), a.points.end());
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  if ((a.has_colors() || a.empty()) && (b.has_colors() || b.empty()) &&
      (a.has_colors() || b.has_colors())) {
    out.colors.insert(out.colors.end(), a.colors.begin(), a.colors.end());
    out.colors.insert(out.colors.end(), b.colors.begin(), b.colors.end());
  }
  if ((a.has_confidences() || a.empty()) && (b.has_confidences() || b.empty()) &&
      (a.has_confidences() || b.has_confidences())) {
    out.confidences.insert(out.confidences.end(), a.confidences.begin(),
                           a.confidences.end());
    out.confidences.insert(out.confidences.end(), b.confidences.begin(),
                           b.confidences.end());
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& pc, double voxel_m) {
  if (voxel_m <= 0.0)
    throw std::invalid_argument("voxel_downsample: voxel size must be positive");

  struct Bucket {
    Eigen::Vector3d pos_sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d color_sum = Eigen::Vector3d::Zero();
    double conf_sum = 0.0;
    std::size_t count = 0;
  };
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
  // std::map keeps keys sorted, which fixes the output order. The grid is
  // anchored at the cloud's minimum corner so a voxel covering the whole
  // bounding box yields exactly one point.
  std::map<Key, Bucket> buckets;

  Eigen::Vector3f anchor = Eigen::Vector3f::Zero();
  if (!pc.empty()) {
    anchor = pc.points[0];
    for (const Eigen::Vector3f& p : pc.points) anchor = anchor.cwiseMin(p);
  }

  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Eigen::Vector3f p = pc.points[i] - anchor;
    const Key key{static_cast<std::int64_t>(std::floor(p.x() / voxel_m)),
                  static_cast<std::int64_t>(std::floor(p.y() / voxel_m)),
                  static_cast<std::int64_t>(std::floor(p.z() / voxel_m))};
    Bucket& b = buckets[key];
    b.pos_sum += pc.points[i].cast<double>();
    if (pc.has_colors())
      b.color_sum += Eigen::Vector3d(pc.colors[i].r, pc.colors[i].g, pc.colors[i].b);
    if (pc.has_confidences()) b.conf_sum += pc.confidences[i];
    ++b.count;
  }

  PointCloud out;
  out.points.reserve(buckets.size());
  for (const auto& [key, b] : buckets) {
    const double n = static_cast<double>(b.count);
    out.points.emplace_back((b.pos_sum / n).cast<float>());
    if (pc.has_colors()) {
      const Eigen::Vector3d c = b.color_sum / n;
      out.colors.push_back({static_cast<std::uint8_t>(std::lround(c.x())),
                            static_cast<std::uint8_t>(std::lround(c.y())),
                            static_cast<std::uint8_t>(std::lround(c.z()))});
    }
    if (pc.has_confidences())
      out.confidences.push_back(static_cast<float>(b.conf_sum / n));
  }
  return out;
}

}  // namespace rtdense::cloud
