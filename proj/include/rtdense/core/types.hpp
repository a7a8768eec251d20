#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rtdense {

/// Pinhole intrinsics of a rectified camera. Both cameras of a rig share one
/// set after rectification.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  bool valid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
           cx < width && cy >= 0.0 && cy < height;
  }
};

/// Rectified stereo rig: shared intrinsics plus metric baseline.
struct StereoRig {
  Intrinsics intrinsics;
  double baseline_m = 0.0;

  bool valid() const { return intrinsics.valid() && baseline_m > 0.0; }
};

/// Rigid camera pose, camera-from-world: X_cam = R * X_world + t.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return Pose{}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& world) const {
    return rotation * world + translation;
  }

  Eigen::Vector3d apply_inverse(const Eigen::Vector3d& cam) const {
    return rotation.transpose() * (cam - translation);
  }

  Pose inverse() const {
    Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(rotation.transpose() * translation);
    return inv;
  }

  /// Camera center in world coordinates.
  Eigen::Vector3d center() const { return -(rotation.transpose() * translation); }

  bool is_valid(double tol = 1e-9) const {
    const Eigen::Matrix3d rtr = rotation.transpose() * rotation;
    return (rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol &&
           translation.allFinite();
  }
};

/// a ∘ b: apply b first, then a.
inline Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

template <typename T>
struct Image2D {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image2D() = default;
  Image2D(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  T* row(int y) { return data.data() + static_cast<std::size_t>(y) * width; }
  const T* row(int y) const {
    return data.data() + static_cast<std::size_t>(y) * width;
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }

  bool same_size(const Image2D& other) const {
    return width == other.width && height == other.height;
  }
  template <typename U>
  bool same_size(const Image2D<U>& other) const {
    return width == other.width && height == other.height;
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  bool operator==(const Image2D& other) const = default;
};

struct Rgb8 {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb8&) const = default;
};

using GrayImage = Image2D<std::uint8_t>;
using ColorImage = Image2D<Rgb8>;

/// Per-pixel disparity in fractional pixels. Negative values mark invalid
/// pixels; every valid disparity satisfies 0 <= d < d_max.
struct DisparityMap : Image2D<float> {
  static constexpr float kInvalid = -1.0f;

  DisparityMap() = default;
  DisparityMap(int w, int h, float fill = kInvalid) : Image2D<float>(w, h, fill) {}

  static bool is_valid(float d) { return d >= 0.0f; }
};

/// Per-pixel metric depth. Non-positive or non-finite values mark invalid
/// pixels, so hot loops test validity with a single comparison.
struct DepthMap : Image2D<float> {
  static constexpr float kInvalid = 0.0f;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = kInvalid) : Image2D<float>(w, h, fill) {}

  static bool is_valid(float z) { return z > 0.0f && std::isfinite(z); }
};

/// Confidence paired with a depth map; defined exactly where the depth is
/// valid. Stereo emits values in [0, 1); fusion accumulates sums of them.
struct ConfidenceMap : Image2D<float> {
  ConfidenceMap() = default;
  ConfidenceMap(int w, int h, float fill = 0.0f) : Image2D<float>(w, h, fill) {}
};

/// Dense remap table: for each output pixel the fractional source coordinates
/// to sample. Coordinates outside the declared source bounds mark the pixel
/// out-of-view (rendered black).
struct RectifyMap {
  int width = 0;
  int height = 0;
  int src_width = 0;
  int src_height = 0;
  std::vector<Eigen::Vector2f> coords;  // row-major (u, v)

  RectifyMap() = default;
  RectifyMap(int w, int h, int sw, int sh)
      : width(w),
        height(h),
        src_width(sw),
        src_height(sh),
        coords(static_cast<std::size_t>(w) * h, Eigen::Vector2f(-1.0f, -1.0f)) {}

  Eigen::Vector2f& at(int x, int y) {
    return coords[static_cast<std::size_t>(y) * width + x];
  }
  const Eigen::Vector2f& at(int x, int y) const {
    return coords[static_cast<std::size_t>(y) * width + x];
  }

  bool in_source(const Eigen::Vector2f& c) const {
    return c.x() >= 0.0f && c.x() <= static_cast<float>(src_width - 1) &&
           c.y() >= 0.0f && c.y() <= static_cast<float>(src_height - 1);
  }

  static RectifyMap identity(int w, int h) {
    RectifyMap map(w, h, w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        map.at(x, y) = Eigen::Vector2f(static_cast<float>(x), static_cast<float>(y));
    return map;
  }
};

}  // namespace rtdense
