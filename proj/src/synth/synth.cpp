#include "rtdense/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "rtdense/core/geometry.hpp"

namespace rtdense::synth {
namespace {

// 2D integer hash (xxhash-style avalanche) -> [0, 1). Platform-independent.
inline double lattice_value(std::uint32_t seed, std::int64_t ix, std::int64_t iy) {
  std::uint64_t h = seed;
  h ^= static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ull;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
  h ^= static_cast<std::uint64_t>(iy) * 0xC2B2AE3D27D4EB4Full;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Lattice values are stratified on a checkerboard: even nodes draw from the
// upper band, odd nodes from the lower one. Adjacent nodes then always
// differ by at least 0.3, so every cell carries a matchable gradient; plain
// uniform draws leave random flat patches that starve sub-pixel matching.
inline double stratified_value(std::uint32_t seed, std::int64_t ix, std::int64_t iy) {
  const double u = lattice_value(seed, ix, iy);
  return ((ix + iy) & 1) == 0 ? 0.65 + 0.35 * u : 0.35 * u;
}

}  // namespace

ValueNoise::ValueNoise(std::uint32_t seed, int octaves)
    : seed_(seed), octaves_(octaves) {}

// Bilinear lattice blend on purpose: smoothstep's derivative vanishes on
// every lattice line, leaving periodic bands without horizontal gradient.
// Each octave's lattice is phase-shifted so their fold lines never stack.
double ValueNoise::sample(double x, double y) const {
  double sum = 0.0, amplitude = 1.0, norm = 0.0, freq = 1.0;
  for (int o = 0; o < octaves_; ++o) {
    const std::uint32_t op = seed_ ^ (0x9E3779B9u + static_cast<std::uint32_t>(o));
    const double sx = x * freq + lattice_value(op, 11, 7) * 64.0;
    const double sy = y * freq + lattice_value(op, 3, 29) * 64.0;
    const std::int64_t ix = static_cast<std::int64_t>(std::floor(sx));
    const std::int64_t iy = static_cast<std::int64_t>(std::floor(sy));
    const double tx = sx - static_cast<double>(ix);
    const double ty = sy - static_cast<double>(iy);
    const std::uint32_t os = seed_ + static_cast<std::uint32_t>(o) * 0x68BC21EBu;
    const double v00 = stratified_value(os, ix, iy);
    const double v10 = stratified_value(os, ix + 1, iy);
    const double v01 = stratified_value(os, ix, iy + 1);
    const double v11 = stratified_value(os, ix + 1, iy + 1);
    const double v0 = v00 + tx * (v10 - v00);
    const double v1 = v01 + tx * (v11 - v01);
    sum += amplitude * (v0 + ty * (v1 - v0));
    norm += amplitude;
    amplitude *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

StereoRig make_rig(int width, int height, double fx, double baseline_m) {
  StereoRig rig;
  if (fx <= 0.0) fx = 0.8 * width;
  rig.intrinsics = {fx, fx, 0.5 * (width - 1), 0.5 * (height - 1), width, height};
  rig.baseline_m = baseline_m;
  return rig;
}

namespace {

// Surfaces are world planes n . X = c. Depth along the pixel ray of a camera
// with pose (R, t): Z = (c - n . C) / (n . (R^T dir)), C the camera center.
struct WorldPlane {
  Eigen::Vector3d n;
  double c;
};

double plane_depth_along_ray(const WorldPlane& plane, const Pose& pose,
                             const Eigen::Vector3d& dir_cam) {
  const Eigen::Vector3d dir_world = pose.rotation.transpose() * dir_cam;
  const double denom = plane.n.dot(dir_world);
  if (denom == 0.0) return -1.0;
  return (plane.c - plane.n.dot(pose.center())) / denom;
}

WorldPlane ramp_plane(const SyntheticScene& scene) {
  // For the identity camera the ramp has disparity d(u) = d0 + (d1-d0) u/(W-1)
  // at column u. With 1/Z = d/(b fx) and u = cx + fx X/Z this is the plane
  //   k fx X + (d0 + k cx) Z = b fx,   k = (d1 - d0)/(W - 1).
  const Intrinsics& intr = scene.rig.intrinsics;
  const double k = (scene.ramp_d1_px - scene.ramp_d0_px) / (intr.width - 1);
  WorldPlane p;
  p.n = Eigen::Vector3d(k * intr.fx, 0.0, scene.ramp_d0_px + k * intr.cx);
  p.c = scene.rig.baseline_m * intr.fx;
  return p;
}

Eigen::Vector3d pixel_ray(const Intrinsics& intr, double u, double v) {
  return {(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
}

}  // namespace

double SyntheticScene::surface_depth(const Pose& pose, double u, double v) const {
  const Eigen::Vector3d dir = pixel_ray(rig.intrinsics, u, v);
  switch (surface) {
    case SurfaceKind::kPlane: {
      const WorldPlane p{Eigen::Vector3d::UnitZ(), plane_depth_m};
      return plane_depth_along_ray(p, pose, dir);
    }
    case SurfaceKind::kRamp:
      return plane_depth_along_ray(ramp_plane(*this), pose, dir);
    case SurfaceKind::kStep: {
      // Near plane covers world x >= split, far plane x < split; the visible
      // surface is the nearest hit whose x lies in its plane's domain.
      const Eigen::Vector3d dir_w = pose.rotation.transpose() * dir;
      const Eigen::Vector3d center = pose.center();
      auto hit_x = [&](double z) { return center.x() + dir_w.x() * z; };
      const double z_near =
          plane_depth_along_ray({Eigen::Vector3d::UnitZ(), step_near_m}, pose, dir);
      const double z_far =
          plane_depth_along_ray({Eigen::Vector3d::UnitZ(), step_far_m}, pose, dir);
      const bool near_ok = z_near > 0.0 && hit_x(z_near) >= step_split_x_m;
      const bool far_ok = z_far > 0.0 && hit_x(z_far) < step_split_x_m;
      if (near_ok && far_ok) return std::min(z_near, z_far);
      if (near_ok) return z_near;
      if (far_ok) return z_far;
      // Ray threads the gap at the step riser; report the nearer plane.
      if (z_near > 0.0 && z_far > 0.0) return std::min(z_near, z_far);
      return std::max(z_near, z_far);
    }
  }
  return -1.0;
}

namespace {

SyntheticScene base_scene(int width, int height, int frames, double step_m) {
  SyntheticScene scene;
  scene.rig = make_rig(width, height);
  scene.trajectory.resize(frames);
  for (int i = 0; i < frames; ++i) {
    // Lateral sweep with a slight vertical drift, camera-from-world.
    Pose pose;
    pose.translation = -Eigen::Vector3d(step_m * i, 0.2 * step_m * i, 0.0);
    scene.trajectory[i] = pose;
  }
  return scene;
}

}  // namespace

SyntheticScene make_plane_scene(int width, int height, double disparity_px,
                                int frames, double step_m) {
  SyntheticScene scene = base_scene(width, height, frames, step_m);
  scene.surface = SurfaceKind::kPlane;
  scene.plane_depth_m =
      scene.rig.baseline_m * scene.rig.intrinsics.fx / disparity_px;
  return scene;
}

SyntheticScene make_ramp_scene(int width, int height, double d0_px, double d1_px,
                               int frames, double step_m) {
  SyntheticScene scene = base_scene(width, height, frames, step_m);
  scene.surface = SurfaceKind::kRamp;
  scene.ramp_d0_px = d0_px;
  scene.ramp_d1_px = d1_px;
  return scene;
}

SyntheticScene make_step_scene(int width, int height, double near_disp_px,
                               double far_disp_px, int frames, double step_m) {
  SyntheticScene scene = base_scene(width, height, frames, step_m);
  scene.surface = SurfaceKind::kStep;
  const double bf = scene.rig.baseline_m * scene.rig.intrinsics.fx;
  scene.step_near_m = bf / near_disp_px;
  scene.step_far_m = bf / far_disp_px;
  scene.step_split_x_m = 0.0;
  return scene;
}

namespace {

double auto_frequency(const SyntheticScene& scene) {
  if (scene.texture_frequency > 0.0) return scene.texture_frequency;
  // Base-octave features spanning roughly 48 px at the farthest surface point
  // (where on-screen texture is finest), so the finest octave stays smooth
  // enough to survive bilinear warping.
  double z_ref = scene.plane_depth_m;
  if (scene.surface == SurfaceKind::kRamp) {
    const double bf = scene.rig.baseline_m * scene.rig.intrinsics.fx;
    z_ref = bf / std::min(scene.ramp_d0_px, scene.ramp_d1_px);
  } else if (scene.surface == SurfaceKind::kStep) {
    z_ref = std::max(scene.step_near_m, scene.step_far_m);
  }
  return scene.rig.intrinsics.fx / (48.0 * z_ref);
}

inline std::uint8_t shade(const ValueNoise& noise, double freq,
                          const Eigen::Vector3d& world) {
  const double v = noise.sample(world.x() * freq, world.y() * freq);
  return static_cast<std::uint8_t>(std::lround(30.0 + 195.0 * v));
}

Pose right_camera_pose(const Pose& left, double baseline_m) {
  // The right camera sits +baseline along the left camera's x axis, so
  // points shift by -b in x once expressed in right-camera coordinates.
  Pose right = left;
  right.translation.x() -= baseline_m;
  return right;
}

}  // namespace

StereoRender render_stereo_pair(const SyntheticScene& scene, const Pose& pose,
                                int d_max) {
  const Intrinsics& intr = scene.rig.intrinsics;
  const int W = intr.width, H = intr.height;
  const double bf = scene.rig.baseline_m * intr.fx;
  const ValueNoise noise(scene.texture_seed, scene.texture_octaves);
  const double freq = auto_frequency(scene);

  StereoRender out{GrayImage(W, H), GrayImage(W, H), DisparityMap(W, H),
                   DepthMap(W, H)};

  const Pose right_pose = right_camera_pose(pose, scene.rig.baseline_m);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double z = scene.surface_depth(pose, x, y);
      if (z <= 0.0)
        throw std::invalid_argument("synth: surface behind or parallel to camera");
      const double d = bf / z;
      if (d <= 0.0 || (d_max > 0 && d >= d_max))
        throw std::invalid_argument(
            "synth: surface outside the representable disparity range");
      out.gt_depth.at(x, y) = static_cast<float>(z);
      out.gt_disparity.at(x, y) = static_cast<float>(d);

      const Eigen::Vector3d world =
          pose.center() +
          pose.rotation.transpose() * pixel_ray(intr, x, y) * z;
      out.left.at(x, y) = shade(noise, freq, world);
    }
  }

  // Right image: the texture warped by the exact disparity of the surface the
  // right camera sees. Evaluating the texture at the corresponding surface
  // point is that warp in continuous form; resampling the quantized left
  // raster instead would add interpolation bias that locks matches to
  // integer disparities.
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double z_r = scene.surface_depth(right_pose, x, y);
      if (z_r <= 0.0)
        throw std::invalid_argument("synth: surface behind or parallel to camera");
      const Eigen::Vector3d world =
          right_pose.center() +
          right_pose.rotation.transpose() * pixel_ray(intr, x, y) * z_r;
      out.right.at(x, y) = shade(noise, freq, world);
    }
  }
  return out;
}

std::vector<SequenceFrame> render_sequence(const SyntheticScene& scene, int d_max) {
  if (scene.trajectory.empty())
    throw std::invalid_argument("synth: empty trajectory");

  std::vector<SequenceFrame> frames;
  frames.reserve(scene.trajectory.size());
  std::mt19937 rng(scene.noise.seed);
  std::normal_distribution<double> gauss(0.0, scene.noise.depth_sigma_m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    const Pose& pose = scene.trajectory[i];
    SequenceFrame f;
    f.render = render_stereo_pair(scene, pose, d_max);
    f.pose = pose;
    f.timestamp = static_cast<double>(i) * scene.frame_interval_s;

    f.frame.depth = f.render.gt_depth;
    f.frame.confidence =
        ConfidenceMap(f.frame.depth.width, f.frame.depth.height, scene.frame_confidence);
    f.frame.pose = pose;
    f.frame.frame_id = static_cast<std::int64_t>(i);

    if (scene.noise.depth_sigma_m > 0.0 || scene.noise.outlier_fraction > 0.0) {
      float z_min = std::numeric_limits<float>::max(), z_max = 0.0f;
      for (float z : f.render.gt_depth.data) {
        z_min = std::min(z_min, z);
        z_max = std::max(z_max, z);
      }
      std::uniform_real_distribution<double> outlier_depth(0.25 * z_min, 3.0 * z_max);
      for (float& z : f.frame.depth.data) {
        if (!DepthMap::is_valid(z)) continue;
        if (scene.noise.outlier_fraction > 0.0 &&
            unit(rng) < scene.noise.outlier_fraction) {
          z = static_cast<float>(outlier_depth(rng));
        } else if (scene.noise.depth_sigma_m > 0.0) {
          z = std::max(1e-3f, z + static_cast<float>(gauss(rng)));
        }
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_dataset(const SyntheticScene& scene, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "left");
  fs::create_directories(dir / "right");
  fs::create_directories(dir / "gt");

  Calibration calib;
  calib.rig = scene.rig;
  write_calibration(calib, dir / "calib.txt");

  const std::vector<SequenceFrame> frames = render_sequence(scene);
  Trajectory traj;
  char name[64];
  for (const SequenceFrame& f : frames) {
    std::snprintf(name, sizeof(name), "%013.6f.png", f.timestamp);
    write_png(f.render.left, dir / "left" / name);
    write_png(f.render.right, dir / "right" / name);
    std::snprintf(name, sizeof(name), "gt_%06lld.pfm",
                  static_cast<long long>(f.frame.frame_id));
    write_pfm(f.render.gt_depth, dir / "gt" / name);
    traj.push_back(TrajectoryEntry::from_pose(f.timestamp, f.pose));
  }
  write_trajectory(traj, dir / "poses.txt");
}

}  // namespace rtdense::synth
