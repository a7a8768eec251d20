#include <algorithm>
#include <cstring>
#include <vector>

#include "rtdense/core/threading.hpp"
#include "rtdense/stereo/stereo.hpp"

namespace rtdense::stereo {

void StereoConfig::validate() const {
  if (d_max < 2) throw std::invalid_argument("stereo: d_max must be >= 2");
  if (d_max > 1024) throw std::invalid_argument("stereo: d_max must be <= 1024");
  if (window_radius < 0 || window_radius > 7)
    throw std::invalid_argument("stereo: window_radius must be in [0, 7]");
  if (sgm.p1 == 0 || sgm.p1 >= sgm.p2)
    throw std::invalid_argument("stereo: SGM penalties must satisfy 0 < p1 < p2");
  if (sgm.p2 > 2500)
    throw std::invalid_argument("stereo: p2 must be <= 2500 to keep 16-bit path sums exact");
  if (pkrn_floor <= 0.0f)
    throw std::invalid_argument("stereo: pkrn_floor must be positive");
}

namespace {

// One row of absolute differences, disparity-innermost: ad[x*D + d] =
// |L(x,y) - R(x-d,y)| for d <= x, zero otherwise. The zero fill makes the
// box sums below equal window sums truncated to the x >= d region.
void compute_ad_row(const std::uint8_t* left_row, const std::uint8_t* right_row,
                    int width, int d_max, std::uint8_t* ad) {
  std::memset(ad, 0, static_cast<std::size_t>(width) * d_max);
  for (int x = 0; x < width; ++x) {
    const int lv = left_row[x];
    const int n = std::min(x + 1, d_max);
    std::uint8_t* out = ad + static_cast<std::size_t>(x) * d_max;
    for (int d = 0; d < n; ++d) {
      const int diff = lv - right_row[x - d];
      out[d] = static_cast<std::uint8_t>(diff < 0 ? -diff : diff);
    }
  }
}

void add_row(std::uint16_t* vsum, const std::uint8_t* ad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) vsum[i] += ad[i];
}

void sub_row(std::uint16_t* vsum, const std::uint8_t* ad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) vsum[i] -= ad[i];
}

}  // namespace

CostVolume compute_cost_volume(const GrayImage& left, const GrayImage& right,
                               const StereoConfig& cfg) {
  cfg.validate();
  if (!left.same_size(right))
    throw std::invalid_argument("stereo: left/right image sizes differ");
  if (left.width <= 0 || left.height <= 0)
    throw std::invalid_argument("stereo: empty input image");

  const int W = left.width, H = left.height;
  const int D = cfg.d_max, r = cfg.window_radius;
  const std::size_t row_cells = static_cast<std::size_t>(W) * D;
  const int ring_rows = 2 * r + 2;

  CostVolume vol(W, H, D);

#pragma omp parallel num_threads(thread_count())
  {
    std::vector<std::uint8_t> ring(static_cast<std::size_t>(ring_rows) * row_cells);
    std::vector<std::uint16_t> vsum(row_cells);
    std::vector<std::uint16_t> hbox(D);
    auto ring_row = [&](int yy) { return ring.data() + (yy % ring_rows) * row_cells; };
    int cached_y = -2;  // row whose window is currently in vsum

#pragma omp for schedule(static)
    for (int y = 0; y < H; ++y) {
      if (cached_y == y - 1) {
        // Slide the vertical window: drop row y-1-r, admit row y+r.
        if (y - 1 - r >= 0) sub_row(vsum.data(), ring_row(y - 1 - r), row_cells);
        if (y + r <= H - 1) {
          compute_ad_row(left.row(y + r), right.row(y + r), W, D, ring_row(y + r));
          add_row(vsum.data(), ring_row(y + r), row_cells);
        }
      } else {
        std::fill(vsum.begin(), vsum.end(), std::uint16_t{0});
        for (int yy = std::max(y - r, 0); yy <= std::min(y + r, H - 1); ++yy) {
          compute_ad_row(left.row(yy), right.row(yy), W, D, ring_row(yy));
          add_row(vsum.data(), ring_row(yy), row_cells);
        }
      }
      cached_y = y;

      // Horizontal box over vsum, truncated at the image edges.
      std::fill(hbox.begin(), hbox.end(), std::uint16_t{0});
      for (int x = 0; x <= std::min(r, W - 1); ++x) {
        const std::uint16_t* col = vsum.data() + static_cast<std::size_t>(x) * D;
        for (int d = 0; d < D; ++d) hbox[d] += col[d];
      }

      for (int x = 0; x < W; ++x) {
        if (x > 0) {
          if (x + r <= W - 1) {
            const std::uint16_t* col = vsum.data() + static_cast<std::size_t>(x + r) * D;
            for (int d = 0; d < D; ++d) hbox[d] += col[d];
          }
          if (x - 1 - r >= 0) {
            const std::uint16_t* col = vsum.data() + static_cast<std::size_t>(x - 1 - r) * D;
            for (int d = 0; d < D; ++d) hbox[d] -= col[d];
          }
        }
        std::uint16_t* out = vol.cell(x, y);
        std::memcpy(out, hbox.data(), static_cast<std::size_t>(D) * sizeof(std::uint16_t));
        for (int d = x + 1; d < D; ++d) out[d] = kSentinelCost;
      }
    }
  }
  return vol;
}

}  // namespace rtdense::stereo
