#pragma once

#include <cstdint>
#include <utility>

#include "rtdense/core/geometry.hpp"
#include "rtdense/core/types.hpp"

namespace rtdense::stereo {

/// Cost for disparities that reach left of the right image (x - d < 0). Large
/// enough to never win, small enough that 16-bit path arithmetic cannot wrap:
/// path values stay <= kSentinelCost + p2 and the sliding-window SAD itself
/// is bounded by 255 * (2r+1)^2 <= 57375 for the allowed radii.
inline constexpr std::uint16_t kSentinelCost = 60000;

/// Per-pixel, per-disparity dissimilarity, disparity-innermost.
template <typename T>
struct CostVolumeT {
  int width = 0;
  int height = 0;
  int d_max = 0;
  std::vector<T> cost;

  CostVolumeT() = default;
  CostVolumeT(int w, int h, int d, T fill = T{})
      : width(w), height(h), d_max(d),
        cost(static_cast<std::size_t>(w) * h * d, fill) {}

  T& at(int x, int y, int d) {
    return cost[(static_cast<std::size_t>(y) * width + x) * d_max + d];
  }
  const T& at(int x, int y, int d) const {
    return cost[(static_cast<std::size_t>(y) * width + x) * d_max + d];
  }

  T* cell(int x, int y) {
    return cost.data() + (static_cast<std::size_t>(y) * width + x) * d_max;
  }
  const T* cell(int x, int y) const {
    return cost.data() + (static_cast<std::size_t>(y) * width + x) * d_max;
  }
};

using CostVolume = CostVolumeT<std::uint16_t>;
using AggregatedVolume = CostVolumeT<std::uint32_t>;

struct SgmParams {
  std::uint16_t p1 = 10;   // penalty for |delta d| == 1 along a path
  std::uint16_t p2 = 120;  // penalty for larger jumps; must exceed p1
};

struct StereoConfig {
  int d_max = 100;
  int window_radius = 1;  // 1 -> 3x3 SAD window
  SgmParams sgm;
  float lr_threshold = 1.0f;  // px; non-finite disables the check
  float pkrn_floor = 1.0f;    // floor applied to PKRN numerator/denominator

  /// Throws std::invalid_argument on violated invariants (d_max >= 2 so PKRN
  /// has a second-best, radius 0..7, 0 < p1 < p2 <= 2500 so 16-bit path
  /// arithmetic stays exact).
  void validate() const;
};

/// SAD cost volume per the window sum of absolute differences, computed with
/// sliding box sums so each window costs O(1) regardless of radius. Windows
/// are clipped to the image and to the x >= d region of the right image;
/// pixels with x - d < 0 carry kSentinelCost.
CostVolume compute_cost_volume(const GrayImage& left, const GrayImage& right,
                               const StereoConfig& cfg);

/// Sum of the four directional path costs (left-to-right, right-to-left,
/// top-to-bottom, bottom-to-top), each following
///   L(p,d) = C(p,d) + min(L(q,d), L(q,d±1)+p1, min_k L(q,k)+p2) - min_k L(q,k)
/// with q the previous pixel on the path and L = C at image borders.
AggregatedVolume sgm_optimize(const CostVolume& vol, const SgmParams& params);

/// Path costs for a single direction (dx, dy) in {(1,0),(-1,0),(0,1),(0,-1)}.
/// Exposed so the directional recurrence can be checked in isolation.
AggregatedVolume sgm_path_costs(const CostVolume& vol, const SgmParams& params,
                                int dx, int dy);

/// Winner-take-all disparity with parabola sub-pixel refinement and PKRN
/// confidence (1 - 1/PKRN, in [0, 1)). Ties break toward the smaller
/// disparity; sub-pixel refinement is skipped at the disparity-range borders.
std::pair<DisparityMap, ConfidenceMap> select_disparity(const AggregatedVolume& vol,
                                                        const StereoConfig& cfg);

/// Right-view disparity from the same aggregated volume by re-indexing
/// cost(x + d, y, d); integer precision, used for the left-right check.
DisparityMap select_right_disparity(const AggregatedVolume& vol);

/// Keeps left disparity d at (x, y) iff |d - right(x - round(d), y)| is within
/// the threshold; everything else (including unverifiable pixels) is
/// invalidated. A non-finite threshold disables the filter.
DisparityMap lr_consistency_filter(const DisparityMap& left_disp,
                                   const DisparityMap& right_disp,
                                   float threshold_px);

/// Full match for one rectified pair: cost volume, SGM, selection, LR filter,
/// disparity-to-depth. Invalid disparities become invalid depths with zero
/// confidence.
std::pair<DepthMap, ConfidenceMap> stereo_match(const GrayImage& left,
                                                const GrayImage& right,
                                                const StereoRig& rig,
                                                const StereoConfig& cfg);

}  // namespace rtdense::stereo
