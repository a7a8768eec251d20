#pragma once

#include <optional>

#include "rtdense/core/types.hpp"

namespace rtdense {

/// Depth from disparity, Z = b * fx / d. Returns the invalid-depth marker (0)
/// for d <= 0 instead of throwing; stereo loops rely on this.
inline double disparity_to_depth(double d, const StereoRig& rig) {
  if (d <= 0.0) return DepthMap::kInvalid;
  return rig.baseline_m * rig.intrinsics.fx / d;
}

/// Disparity from depth, d = b * fx / Z. Returns the invalid-disparity marker
/// (-1) for Z <= 0.
inline double depth_to_disparity(double z, const StereoRig& rig) {
  if (z <= 0.0) return DisparityMap::kInvalid;
  return rig.baseline_m * rig.intrinsics.fx / z;
}

/// Pixel (u, v) at depth z to a 3D point in the camera frame.
inline Eigen::Vector3d backproject(double u, double v, double z,
                                   const Intrinsics& intr) {
  return {(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
}

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Camera-frame point to pixel coordinates plus depth. Empty when the point is
/// behind the camera (z <= 0).
inline std::optional<PixelPoint> project(const Eigen::Vector3d& p,
                                         const Intrinsics& intr) {
  if (p.z() <= 0.0) return std::nullopt;
  return PixelPoint{intr.fx * p.x() / p.z() + intr.cx,
                    intr.fy * p.y() / p.z() + intr.cy, p.z()};
}

/// Re-express a point given in camera frame `from` in camera frame `to`
/// (applies to ∘ from⁻¹).
inline Eigen::Vector3d transform_point(const Eigen::Vector3d& p, const Pose& from,
                                       const Pose& to) {
  return to.apply(from.apply_inverse(p));
}

}  // namespace rtdense
