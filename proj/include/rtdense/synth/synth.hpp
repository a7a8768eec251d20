#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rtdense/core/io.hpp"
#include "rtdense/core/types.hpp"
#include "rtdense/fusion/fusion.hpp"

namespace rtdense::synth {

/// Band-limited multi-octave value noise on a seeded integer lattice. Smooth
/// enough to stay matchable under bilinear warping; plain white noise would
/// alias.
class ValueNoise {
 public:
  explicit ValueNoise(std::uint32_t seed, int octaves = 3);

  /// Sample in [0, 1].
  double sample(double x, double y) const;

 private:
  std::uint32_t seed_;
  int octaves_;
};

enum class SurfaceKind { kPlane, kRamp, kStep };

struct NoiseSpec {
  double depth_sigma_m = 0.0;
  double outlier_fraction = 0.0;
  std::uint32_t seed = 1;
};

/// Fully analytic scene: one or two world planes, procedural texture, a
/// camera trajectory, and an optional measurement-noise model. Ground-truth
/// depth and disparity are exact at every pixel.
struct SyntheticScene {
  SurfaceKind surface = SurfaceKind::kPlane;

  // Plane / step surfaces, world frame (+z away from the t=0 camera). The
  // step's near plane covers world x >= split, the far plane x < split, so
  // the near side occludes a band of the far side in the right view.
  double plane_depth_m = 2.0;
  double step_near_m = 1.5;
  double step_far_m = 2.5;
  double step_split_x_m = 0.0;  // world x of the depth discontinuity

  // Ramp surface: disparity at the left/right image edge for the t=0 camera.
  double ramp_d0_px = 10.0;
  double ramp_d1_px = 40.0;

  StereoRig rig;
  std::vector<Pose> trajectory;
  double frame_interval_s = 1.0 / 15.0;

  std::uint32_t texture_seed = 7;
  double texture_frequency = 0.0;  // cycles per meter; 0 = auto from depth
  int texture_octaves = 3;
  NoiseSpec noise;
  float frame_confidence = 0.8f;  // confidence attached to generated frames

  /// Exact depth of the visible surface along the pixel ray; invalid only if
  /// the ray escapes the surface (cannot happen for full planes).
  double surface_depth(const Pose& pose, double u, double v) const;
};

/// Default rig + scene helpers used across tests and the CLI.
StereoRig make_rig(int width, int height, double fx = 0.0, double baseline_m = 0.1);
SyntheticScene make_plane_scene(int width, int height, double disparity_px,
                                int frames = 1, double step_m = 0.01);
SyntheticScene make_ramp_scene(int width, int height, double d0_px, double d1_px,
                               int frames = 1, double step_m = 0.01);
SyntheticScene make_step_scene(int width, int height, double near_disp_px,
                               double far_disp_px, int frames = 1,
                               double step_m = 0.01);

struct StereoRender {
  GrayImage left;
  GrayImage right;
  DisparityMap gt_disparity;
  DepthMap gt_depth;
};

/// Renders the textured surface for the left camera and warps it into the
/// right view by the exact disparity of the surface visible there (bilinear
/// sampling). Throws when the surface leaves the representable disparity
/// range (0, d_max).
StereoRender render_stereo_pair(const SyntheticScene& scene, const Pose& pose,
                                int d_max = 0);

struct SequenceFrame {
  StereoRender render;
  fusion::DepthFrame frame;  // ground truth plus the scene's noise model
  Pose pose;
  double timestamp = 0.0;
};

/// Per-pose rendering over the scene trajectory with seeded, reproducible
/// noise/outlier injection into the depth frames.
std::vector<SequenceFrame> render_sequence(const SyntheticScene& scene, int d_max = 0);

/// Writes the scene as an ingestible dataset: left/ and right/ PNGs named by
/// zero-padded timestamp, calib.txt, poses.txt, and gt/ depth PFMs.
void write_dataset(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace rtdense::synth
