#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rtdense/cloud/cloud.hpp"
#include "rtdense/core/io.hpp"
#include "rtdense/core/types.hpp"

namespace rtdense::metrics {

/// Exact nearest-neighbor index over 3D points. Queries return the same
/// distances as a brute-force scan.
class KdTree3 {
 public:
  explicit KdTree3(std::span<const Eigen::Vector3f> points);

  /// Squared distance (double) and index of the nearest point. The tree must
  /// not be empty.
  std::pair<double, int> nearest(const Eigen::Vector3f& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    float split = 0.0f;
    std::int32_t axis = -1;   // -1 marks a leaf
    std::int32_t left = -1;   // child node index
    std::int32_t right = -1;
    std::int32_t begin = 0;   // leaf range into indices_
    std::int32_t end = 0;
  };

  std::int32_t build(std::int32_t begin, std::int32_t end);
  void search(std::int32_t node, const Eigen::Vector3f& q, double& best_d2,
              int& best_idx) const;

  std::vector<Eigen::Vector3f> points_;
  std::vector<std::int32_t> indices_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// Mean/median absolute depth error over pixels valid in both maps.
/// `defined() == false` (zero overlap) is reported explicitly, never as 0.
struct DepthErrorStats {
  double mae = 0.0;
  double median = 0.0;
  std::size_t overlap_count = 0;

  bool defined() const { return overlap_count > 0; }
};

struct DepthErrorResult {
  Image2D<float> error_map;  // -1 where either input is invalid
  DepthErrorStats stats;
};

DepthErrorResult depth_abs_error(const DepthMap& pred, const DepthMap& ref);

/// Dataset aggregates: valid-pixel-weighted mean of per-map MAEs and the
/// median of per-map medians. Undefined per-map entries are skipped; an
/// all-undefined input yields an undefined result.
struct DatasetDepthStats {
  double mae = 0.0;
  double median_of_medians = 0.0;
  std::size_t map_count = 0;
  std::size_t pixel_count = 0;

  bool defined() const { return map_count > 0; }
};

DatasetDepthStats dataset_depth_stats(std::span<const DepthErrorStats> per_map);

/// Chamfer metrics between two clouds: accuracy/precision from source to
/// target, completeness/recall from target to source, percentages of
/// nearest-neighbor distances strictly below the threshold.
struct CloudMetrics {
  double accuracy_m = 0.0;
  double completeness_m = 0.0;
  double precision_pct = 0.0;
  double recall_pct = 0.0;
  double threshold_m = 0.0;
  bool defined = false;
};

CloudMetrics chamfer_metrics(const cloud::PointCloud& source,
                             const cloud::PointCloud& target, double threshold_m);

struct PrCurveSample {
  double threshold_m = 0.0;
  double precision_pct = 0.0;
  double recall_pct = 0.0;
};

/// Precision/recall per threshold; thresholds must be strictly increasing.
/// Nearest-neighbor distances are computed once and reused.
std::vector<PrCurveSample> precision_recall_curve(const cloud::PointCloud& source,
                                                  const cloud::PointCloud& target,
                                                  std::span<const double> thresholds);

/// 7-DoF similarity transform, applied as s * R * p + t.
struct Sim3 {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return scale * (rotation * p) + translation;
  }
};

/// Closed-form least-squares similarity aligning source onto target
/// (minimizes sum ||target_i - (s R source_i + t)||^2). Throws on fewer than
/// 3 points or rank-deficient (collinear/coincident) geometry.
Sim3 umeyama_sim3(std::span<const Eigen::Vector3d> source,
                  std::span<const Eigen::Vector3d> target);

struct AteResult {
  double rmse_m = 0.0;
  std::size_t pair_count = 0;
  bool aligned = false;
  Sim3 alignment;  // identity when aligned == false
};

/// Root-mean-square absolute trajectory error over timestamp-associated
/// position pairs (nearest within tolerance), after optional sim3 alignment
/// of est onto ref. Throws when no pairs associate.
AteResult ate_rmse(const Trajectory& est, const Trajectory& ref, bool align,
                   double association_tolerance_s = 0.02);

}  // namespace rtdense::metrics
