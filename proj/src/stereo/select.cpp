#include <algorithm>
#include <cmath>

#include "rtdense/core/threading.hpp"
#include "rtdense/stereo/stereo.hpp"

namespace rtdense::stereo {

// Aggregated costs of the four paths stay below 4 * kSentinelCost on every
// cell whose disparity is realizable (x - d >= 0), and reach at least that on
// sentinel cells, so this threshold separates the two exactly.
static constexpr std::uint32_t kAggregatedSentinel = 4u * kSentinelCost;

std::pair<DisparityMap, ConfidenceMap> select_disparity(const AggregatedVolume& vol,
                                                        const StereoConfig& cfg) {
  DisparityMap disp(vol.width, vol.height);
  ConfidenceMap conf(vol.width, vol.height, 0.0f);
  const int D = vol.d_max;

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < vol.height; ++y) {
    for (int x = 0; x < vol.width; ++x) {
      const std::uint32_t* c = vol.cell(x, y);
      const int n = std::min(D, x + 1);  // realizable disparities at this pixel

      int best_d = 0;
      std::uint32_t best = c[0];
      std::uint32_t second = UINT32_MAX;
      for (int d = 1; d < n; ++d) {
        if (c[d] < best) {
          second = best;
          best = c[d];
          best_d = d;
        } else if (c[d] < second) {
          second = c[d];
        }
      }

      double d_out = best_d;
      if (best_d > 0 && best_d < n - 1) {
        const double cm = c[best_d - 1], c0 = c[best_d], cp = c[best_d + 1];
        const double denom = cm - 2.0 * c0 + cp;
        if (denom > 0.0) {
          const double offset = std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
          d_out += offset;
        }
      }
      disp.at(x, y) = static_cast<float>(d_out);

      const double floor = cfg.pkrn_floor;
      const double smallest = std::max(static_cast<double>(best), floor);
      const double second_best =
          second == UINT32_MAX ? smallest : std::max(static_cast<double>(second), floor);
      const double pkrn = second_best / smallest;
      conf.at(x, y) = static_cast<float>(1.0 - 1.0 / pkrn);
    }
  }
  return {std::move(disp), std::move(conf)};
}

DisparityMap select_right_disparity(const AggregatedVolume& vol) {
  DisparityMap disp(vol.width, vol.height);

  // right_cost(x, y, d) = cost(x + d, y, d). Walking the volume cell-by-cell
  // keeps the reads sequential; within one right pixel the candidates arrive
  // in increasing d, so a strict compare keeps the smaller disparity on ties.
#pragma omp parallel num_threads(thread_count())
  {
    std::vector<std::uint32_t> best(vol.width);
    std::vector<int> best_d(vol.width);

#pragma omp for schedule(static)
    for (int y = 0; y < vol.height; ++y) {
      std::fill(best.begin(), best.end(), UINT32_MAX);
      std::fill(best_d.begin(), best_d.end(), -1);
      for (int xl = 0; xl < vol.width; ++xl) {
        const std::uint32_t* cell = vol.cell(xl, y);
        const int n = std::min(vol.d_max, xl + 1);
        for (int d = 0; d < n; ++d) {
          const int xr = xl - d;
          if (cell[d] < best[xr]) {
            best[xr] = cell[d];
            best_d[xr] = d;
          }
        }
      }
      for (int x = 0; x < vol.width; ++x)
        disp.at(x, y) = best_d[x] >= 0 ? static_cast<float>(best_d[x])
                                       : DisparityMap::kInvalid;
    }
  }
  return disp;
}

DisparityMap lr_consistency_filter(const DisparityMap& left_disp,
                                   const DisparityMap& right_disp,
                                   float threshold_px) {
  if (!left_disp.same_size(right_disp))
    throw std::invalid_argument("lr_consistency_filter: disparity map sizes differ");
  if (!std::isfinite(threshold_px)) return left_disp;

  DisparityMap out(left_disp.width, left_disp.height);
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < left_disp.height; ++y) {
    for (int x = 0; x < left_disp.width; ++x) {
      const float d = left_disp.at(x, y);
      if (!DisparityMap::is_valid(d)) continue;
      const int xr = x - static_cast<int>(std::lround(d));
      if (xr < 0 || xr >= left_disp.width) continue;
      const float dr = right_disp.at(xr, y);
      if (!DisparityMap::is_valid(dr)) continue;
      if (std::abs(d - dr) <= threshold_px) out.at(x, y) = d;
    }
  }
  return out;
}

std::pair<DepthMap, ConfidenceMap> stereo_match(const GrayImage& left,
                                                const GrayImage& right,
                                                const StereoRig& rig,
                                                const StereoConfig& cfg) {
  if (!rig.valid()) throw std::invalid_argument("stereo_match: invalid rig");
  const CostVolume vol = compute_cost_volume(left, right, cfg);
  const AggregatedVolume agg = sgm_optimize(vol, cfg.sgm);
  auto [disp, conf] = select_disparity(agg, cfg);
  const DisparityMap right_disp = select_right_disparity(agg);
  const DisparityMap filtered = lr_consistency_filter(disp, right_disp, cfg.lr_threshold);

  DepthMap depth(filtered.width, filtered.height);
  ConfidenceMap out_conf(filtered.width, filtered.height, 0.0f);
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < filtered.height; ++y) {
    for (int x = 0; x < filtered.width; ++x) {
      const float d = filtered.at(x, y);
      if (!DisparityMap::is_valid(d)) continue;
      const double z = disparity_to_depth(d, rig);
      if (!DepthMap::is_valid(static_cast<float>(z))) continue;
      depth.at(x, y) = static_cast<float>(z);
      out_conf.at(x, y) = conf.at(x, y);
    }
  }
  return {std::move(depth), std::move(out_conf)};
}

}  // namespace rtdense::stereo
