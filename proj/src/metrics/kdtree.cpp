#include <algorithm>
#include <numeric>

#include "rtdense/metrics/metrics.hpp"

namespace rtdense::metrics {

namespace {
constexpr std::int32_t kLeafSize = 16;

inline double sq_dist(const Eigen::Vector3f& a, const Eigen::Vector3f& b) {
  const double dx = static_cast<double>(a.x()) - b.x();
  const double dy = static_cast<double>(a.y()) - b.y();
  const double dz = static_cast<double>(a.z()) - b.z();
  return dx * dx + dy * dy + dz * dz;
}
}  // namespace

KdTree3::KdTree3(std::span<const Eigen::Vector3f> points)
    : points_(points.begin(), points.end()), indices_(points.size()) {
  std::iota(indices_.begin(), indices_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<std::int32_t>(points_.size()));
  }
}

std::int32_t KdTree3::build(std::int32_t begin, std::int32_t end) {
  const std::int32_t node_idx = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();

  if (end - begin <= kLeafSize) {
    nodes_[node_idx].begin = begin;
    nodes_[node_idx].end = end;
    return node_idx;
  }

  Eigen::Vector3f lo = points_[indices_[begin]];
  Eigen::Vector3f hi = lo;
  for (std::int32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[indices_[i]]);
    hi = hi.cwiseMax(points_[indices_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::int32_t mid = begin + (end - begin) / 2;
  std::nth_element(indices_.begin() + begin, indices_.begin() + mid,
                   indices_.begin() + end, [&](std::int32_t a, std::int32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });

  nodes_[node_idx].axis = axis;
  nodes_[node_idx].split = points_[indices_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[node_idx].left = left;
  nodes_[node_idx].right = right;
  return node_idx;
}

void KdTree3::search(std::int32_t node_idx, const Eigen::Vector3f& q,
                     double& best_d2, int& best_idx) const {
  const Node& node = nodes_[node_idx];
  if (node.axis < 0) {
    for (std::int32_t i = node.begin; i < node.end; ++i) {
      const std::int32_t p = indices_[i];
      const double d2 = sq_dist(q, points_[p]);
      if (d2 < best_d2 || (d2 == best_d2 && p < best_idx)) {
        best_d2 = d2;
        best_idx = p;
      }
    }
    return;
  }

  const double diff = static_cast<double>(q[node.axis]) - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best_d2, best_idx);
  if (diff * diff <= best_d2) search(far, q, best_d2, best_idx);
}

std::pair<double, int> KdTree3::nearest(const Eigen::Vector3f& query) const {
  if (points_.empty()) throw std::logic_error("KdTree3::nearest on empty tree");
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_idx = static_cast<int>(points_.size());
  search(root_, query, best_d2, best_idx);
  return {best_d2, best_idx};
}

}  // namespace rtdense::metrics
