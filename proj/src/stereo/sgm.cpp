#include <algorithm>
#include <vector>

#include "rtdense/core/threading.hpp"
#include "rtdense/stereo/stereo.hpp"

namespace rtdense::stereo {
namespace {

// One recurrence step along a path. prev/cur are padded to D+2 with
// 65535 - p1 at both ends so the d±1 candidates need no branches: the pad
// plus p1 is exactly 65535, which never beats prev[d] (<= kSentinelCost + p2).
// All sums stay below 2^16; see kSentinelCost. Returns min over cur.
inline std::uint16_t sgm_step(const std::uint16_t* __restrict cost_cell,
                              const std::uint16_t* __restrict prev,
                              std::uint16_t* __restrict cur, std::uint16_t prev_min,
                              std::uint16_t p1, std::uint16_t p2, int d_max) {
  const std::uint16_t cap = static_cast<std::uint16_t>(prev_min + p2);
  std::uint16_t m = 65535;
  for (int d = 0; d < d_max; ++d) {
    std::uint16_t best = std::min(prev[d + 1], cap);
    best = std::min(best, static_cast<std::uint16_t>(prev[d] + p1));
    best = std::min(best, static_cast<std::uint16_t>(prev[d + 2] + p1));
    const std::uint16_t v = static_cast<std::uint16_t>(
        cost_cell[d] + static_cast<std::uint16_t>(best - prev_min));
    cur[d + 1] = v;
    m = std::min(m, v);
  }
  return m;
}

inline std::uint16_t init_border(const std::uint16_t* __restrict cost_cell,
                                 std::uint16_t* __restrict cur, int d_max) {
  std::uint16_t m = 65535;
  for (int d = 0; d < d_max; ++d) {
    cur[d + 1] = cost_cell[d];
    m = std::min(m, cost_cell[d]);
  }
  return m;
}

// Both horizontal directions of one row in a single aggregate sweep: the
// right-to-left path lands in a row-sized buffer first, then the
// left-to-right pass adds both into agg while it walks.
void horizontal_pair(const CostVolume& vol, const SgmParams& params,
                     AggregatedVolume& agg) {
  const int W = vol.width, D = vol.d_max;
  const std::uint16_t pad = static_cast<std::uint16_t>(65535 - params.p1);

#pragma omp parallel num_threads(thread_count())
  {
    std::vector<std::uint16_t> row_buf(static_cast<std::size_t>(W) * D);
    std::vector<std::uint16_t> buf_a(D + 2, pad), buf_b(D + 2, pad);

#pragma omp for schedule(static)
    for (int y = 0; y < vol.height; ++y) {
      // Right-to-left pass into row_buf.
      std::uint16_t* prev = buf_a.data();
      std::uint16_t* cur = buf_b.data();
      std::uint16_t prev_min = init_border(vol.cell(W - 1, y), prev, D);
      std::copy_n(prev + 1, D, row_buf.data() + static_cast<std::size_t>(W - 1) * D);
      for (int x = W - 2; x >= 0; --x) {
        prev_min = sgm_step(vol.cell(x, y), prev, cur, prev_min, params.p1,
                            params.p2, D);
        std::copy_n(cur + 1, D, row_buf.data() + static_cast<std::size_t>(x) * D);
        std::swap(prev, cur);
      }

      // Left-to-right pass; accumulate both directions.
      std::fill(buf_a.begin(), buf_a.end(), pad);
      std::fill(buf_b.begin(), buf_b.end(), pad);
      prev = buf_a.data();
      cur = buf_b.data();
      prev_min = init_border(vol.cell(0, y), prev, D);
      {
        std::uint32_t* out = agg.cell(0, y);
        const std::uint16_t* rl = row_buf.data();
        for (int d = 0; d < D; ++d) out[d] += prev[d + 1] + rl[d];
      }
      for (int x = 1; x < W; ++x) {
        prev_min = sgm_step(vol.cell(x, y), prev, cur, prev_min, params.p1,
                            params.p2, D);
        std::uint32_t* out = agg.cell(x, y);
        const std::uint16_t* rl = row_buf.data() + static_cast<std::size_t>(x) * D;
        for (int d = 0; d < D; ++d) out[d] += cur[d + 1] + rl[d];
        std::swap(prev, cur);
      }
    }
  }
}

// One vertical direction, processed in column bands so volume and aggregate
// are read in contiguous chunks per row. Band state: one padded path row per
// column plus its running minimum.
void vertical_path(const CostVolume& vol, const SgmParams& params, int dy,
                   AggregatedVolume& agg) {
  const int W = vol.width, H = vol.height, D = vol.d_max;
  const std::uint16_t pad = static_cast<std::uint16_t>(65535 - params.p1);
  const int band = 64;
  const int n_bands = (W + band - 1) / band;

#pragma omp parallel num_threads(thread_count())
  {
    std::vector<std::uint16_t> prev_rows(static_cast<std::size_t>(band) * (D + 2), pad);
    std::vector<std::uint16_t> prev_mins(band);
    std::vector<std::uint16_t> cur(D + 2, pad);

#pragma omp for schedule(static)
    for (int b = 0; b < n_bands; ++b) {
      const int x0 = b * band;
      const int x1 = std::min(x0 + band, W);
      for (std::size_t i = 0; i < prev_rows.size(); ++i) prev_rows[i] = pad;

      const int y_start = dy > 0 ? 0 : H - 1;
      for (int x = x0; x < x1; ++x) {
        std::uint16_t* prev = prev_rows.data() + static_cast<std::size_t>(x - x0) * (D + 2);
        prev_mins[x - x0] = init_border(vol.cell(x, y_start), prev, D);
        std::uint32_t* out = agg.cell(x, y_start);
        for (int d = 0; d < D; ++d) out[d] += prev[d + 1];
      }
      for (int y = y_start + dy; y >= 0 && y < H; y += dy) {
        for (int x = x0; x < x1; ++x) {
          std::uint16_t* prev = prev_rows.data() + static_cast<std::size_t>(x - x0) * (D + 2);
          const std::uint16_t m = sgm_step(vol.cell(x, y), prev, cur.data(),
                                           prev_mins[x - x0], params.p1, params.p2, D);
          prev_mins[x - x0] = m;
          std::uint32_t* out = agg.cell(x, y);
          for (int d = 0; d < D; ++d) out[d] += cur[d + 1];
          std::copy_n(cur.data() + 1, D, prev + 1);
        }
      }
    }
  }
}

}  // namespace

AggregatedVolume sgm_optimize(const CostVolume& vol, const SgmParams& params) {
  AggregatedVolume agg(vol.width, vol.height, vol.d_max, 0);
  horizontal_pair(vol, params, agg);
  vertical_path(vol, params, 1, agg);
  vertical_path(vol, params, -1, agg);
  return agg;
}

AggregatedVolume sgm_path_costs(const CostVolume& vol, const SgmParams& params,
                                int dx, int dy) {
  if (std::abs(dx) + std::abs(dy) != 1)
    throw std::invalid_argument("sgm_path_costs: direction must be axis-aligned");
  const int W = vol.width, H = vol.height, D = vol.d_max;
  const std::uint16_t pad = static_cast<std::uint16_t>(65535 - params.p1);
  AggregatedVolume agg(W, H, D, 0);

#pragma omp parallel num_threads(thread_count())
  {
    std::vector<std::uint16_t> buf_a(D + 2, pad), buf_b(D + 2, pad);

#pragma omp for schedule(static)
    for (int line = 0; line < (dy == 0 ? H : W); ++line) {
      std::uint16_t* prev = buf_a.data();
      std::uint16_t* cur = buf_b.data();
      std::fill(buf_a.begin(), buf_a.end(), pad);
      std::fill(buf_b.begin(), buf_b.end(), pad);

      int x = dy == 0 ? (dx > 0 ? 0 : W - 1) : line;
      int y = dy == 0 ? line : (dy > 0 ? 0 : H - 1);
      std::uint16_t prev_min = init_border(vol.cell(x, y), prev, D);
      {
        std::uint32_t* out = agg.cell(x, y);
        for (int d = 0; d < D; ++d) out[d] += prev[d + 1];
      }
      const int steps = dy == 0 ? W : H;
      for (int step = 1; step < steps; ++step) {
        x += dx;
        y += dy;
        prev_min = sgm_step(vol.cell(x, y), prev, cur, prev_min, params.p1,
                            params.p2, D);
        std::uint32_t* out = agg.cell(x, y);
        for (int d = 0; d < D; ++d) out[d] += cur[d + 1];
        std::swap(prev, cur);
      }
    }
  }
  return agg;
}

}  // namespace rtdense::stereo
