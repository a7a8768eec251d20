#include "rtdense/core/rectify.hpp"

#include <algorithm>
#include <cmath>

#include "rtdense/core/threading.hpp"

namespace rtdense {
namespace {

template <typename Image, typename Sample>
Image remap(const Image& raw, const RectifyMap& map, Sample sample) {
  if (raw.width != map.src_width || raw.height != map.src_height) {
    throw std::invalid_argument(
        "rectify: raw image size does not match the map's declared source size");
  }
  Image out(map.width, map.height);
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const Eigen::Vector2f c = map.at(x, y);
      if (!map.in_source(c)) continue;  // stays black
      out.at(x, y) = sample(raw, c.x(), c.y());
    }
  }
  return out;
}

struct BilinearWeights {
  int x0, y0, x1, y1;
  float w00, w01, w10, w11;
};

inline BilinearWeights weights_at(float u, float v, int width, int height) {
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const float fx = u - static_cast<float>(x0);
  const float fy = v - static_cast<float>(y0);
  return {x0,
          y0,
          x1,
          y1,
          (1.0f - fx) * (1.0f - fy),
          fx * (1.0f - fy),
          (1.0f - fx) * fy,
          fx * fy};
}

inline std::uint8_t sample_gray(const GrayImage& img, float u, float v) {
  const BilinearWeights w = weights_at(u, v, img.width, img.height);
  const float value = w.w00 * img.at(w.x0, w.y0) + w.w01 * img.at(w.x1, w.y0) +
                      w.w10 * img.at(w.x0, w.y1) + w.w11 * img.at(w.x1, w.y1);
  return static_cast<std::uint8_t>(std::lround(value));
}

inline Rgb8 sample_color(const ColorImage& img, float u, float v) {
  const BilinearWeights w = weights_at(u, v, img.width, img.height);
  const Rgb8 p00 = img.at(w.x0, w.y0), p01 = img.at(w.x1, w.y0);
  const Rgb8 p10 = img.at(w.x0, w.y1), p11 = img.at(w.x1, w.y1);
  auto mix = [&](std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
    return static_cast<std::uint8_t>(
        std::lround(w.w00 * a + w.w01 * b + w.w10 * c + w.w11 * d));
  };
  return {mix(p00.r, p01.r, p10.r, p11.r), mix(p00.g, p01.g, p10.g, p11.g),
          mix(p00.b, p01.b, p10.b, p11.b)};
}

}  // namespace

GrayImage rectify(const GrayImage& raw, const RectifyMap& map) {
  return remap(raw, map, [](const GrayImage& img, float u, float v) {
    return sample_gray(img, u, v);
  });
}

ColorImage rectify(const ColorImage& raw, const RectifyMap& map) {
  return remap(raw, map, [](const ColorImage& img, float u, float v) {
    return sample_color(img, u, v);
  });
}

}  // namespace rtdense
