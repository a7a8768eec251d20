#include <algorithm>
#include <cmath>

#include "rtdense/metrics/metrics.hpp"

namespace rtdense::metrics {
namespace {

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  if (n % 2 == 1) return values[mid];
  const double upper = values[mid];
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace

DepthErrorResult depth_abs_error(const DepthMap& pred, const DepthMap& ref) {
  if (!pred.same_size(ref))
    throw std::invalid_argument("depth_abs_error: map sizes differ");

  DepthErrorResult out;
  out.error_map = Image2D<float>(pred.width, pred.height, -1.0f);

  std::vector<double> errors;
  errors.reserve(pred.pixel_count());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const float zp = pred.data[i], zr = ref.data[i];
    if (!DepthMap::is_valid(zp) || !DepthMap::is_valid(zr)) continue;
    const double ae = std::abs(static_cast<double>(zp) - zr);
    out.error_map.data[i] = static_cast<float>(ae);
    errors.push_back(ae);
    sum += ae;
  }

  out.stats.overlap_count = errors.size();
  if (!errors.empty()) {
    out.stats.mae = sum / static_cast<double>(errors.size());
    out.stats.median = median_of(std::move(errors));
  }
  return out;
}

DatasetDepthStats dataset_depth_stats(std::span<const DepthErrorStats> per_map) {
  DatasetDepthStats out;
  std::vector<double> medians;
  double weighted_sum = 0.0;
  for (const DepthErrorStats& s : per_map) {
    if (!s.defined()) continue;
    weighted_sum += s.mae * static_cast<double>(s.overlap_count);
    out.pixel_count += s.overlap_count;
    medians.push_back(s.median);
    ++out.map_count;
  }
  if (out.map_count == 0) return out;  // undefined
  out.mae = weighted_sum / static_cast<double>(out.pixel_count);
  out.median_of_medians = median_of(std::move(medians));
  return out;
}

}  // namespace rtdense::metrics
