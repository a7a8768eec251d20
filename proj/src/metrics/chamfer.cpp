#include <algorithm>
#include <cmath>

#include "rtdense/core/threading.hpp"
#include "rtdense/metrics/metrics.hpp"

namespace rtdense::metrics {
namespace {

std::vector<double> nn_distances(const cloud::PointCloud& from,
                                 const cloud::PointCloud& to) {
  const KdTree3 tree(to.points);
  std::vector<double> dist(from.size());
  const auto n = static_cast<std::int64_t>(from.size());
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    dist[i] = std::sqrt(tree.nearest(from.points[i]).first);
  return dist;
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double pct_below(const std::vector<double>& v, double threshold) {
  std::size_t n = 0;
  for (double x : v)
    if (x < threshold) ++n;
  return 100.0 * static_cast<double>(n) / static_cast<double>(v.size());
}

}  // namespace

CloudMetrics chamfer_metrics(const cloud::PointCloud& source,
                             const cloud::PointCloud& target, double threshold_m) {
  CloudMetrics m;
  m.threshold_m = threshold_m;
  if (source.empty() || target.empty()) return m;  // undefined

  const std::vector<double> st = nn_distances(source, target);
  const std::vector<double> ts = nn_distances(target, source);
  m.accuracy_m = mean(st);
  m.completeness_m = mean(ts);
  m.precision_pct = pct_below(st, threshold_m);
  m.recall_pct = pct_below(ts, threshold_m);
  m.defined = true;
  return m;
}

std::vector<PrCurveSample> precision_recall_curve(const cloud::PointCloud& source,
                                                  const cloud::PointCloud& target,
                                                  std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (thresholds[i] <= thresholds[i - 1])
      throw std::invalid_argument("precision_recall_curve: thresholds must increase");
  if (source.empty() || target.empty())
    throw std::invalid_argument("precision_recall_curve: empty cloud");

  const std::vector<double> st = nn_distances(source, target);
  const std::vector<double> ts = nn_distances(target, source);

  std::vector<PrCurveSample> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds)
    curve.push_back({t, pct_below(st, t), pct_below(ts, t)});
  return curve;
}

}  // namespace rtdense::metrics
