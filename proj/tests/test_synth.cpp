#include <doctest.h>

#include <cmath>

#include "rtdense/fusion/fusion.hpp"
#include "rtdense/synth/synth.hpp"

using namespace rtdense;
using namespace rtdense::synth;

TEST_SUITE_BEGIN("synth");

TEST_CASE("ground truth satisfies Z = b*fx/d at every pixel") {
  for (auto kind : {SurfaceKind::kPlane, SurfaceKind::kRamp, SurfaceKind::kStep}) {
    SyntheticScene scene;
    switch (kind) {
      case SurfaceKind::kPlane: scene = make_plane_scene(64, 48, 25.0); break;
      case SurfaceKind::kRamp: scene = make_ramp_scene(64, 48, 10.0, 40.0); break;
      case SurfaceKind::kStep: scene = make_step_scene(64, 48, 30.0, 18.0); break;
    }
    const auto r = render_stereo_pair(scene, scene.trajectory[0], 64);
    const double bf = scene.rig.baseline_m * scene.rig.intrinsics.fx;
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) {
        const double z = r.gt_depth.at(x, y);
        const double d = r.gt_disparity.at(x, y);
        CHECK(z > 0.0);
        CHECK(d == doctest::Approx(bf / z).epsilon(1e-6));
      }
  }
}

TEST_CASE("fronto-parallel plane has constant disparity") {
  const auto scene = make_plane_scene(64, 48, 25.0);
  const auto r = render_stereo_pair(scene, scene.trajectory[0], 64);
  for (float d : r.gt_disparity.data) CHECK(d == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("ramp disparity is linear in x for the canonical camera") {
  const auto scene = make_ramp_scene(80, 20, 10.0, 40.0);
  const auto r = render_stereo_pair(scene, scene.trajectory[0], 64);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 80; ++x) {
      const double expected = 10.0 + (40.0 - 10.0) * x / 79.0;
      CHECK(r.gt_disparity.at(x, y) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("step scene: occluded band width equals the disparity difference") {
  const int W = 160, H = 24;
  const auto scene = make_step_scene(W, H, 30.0, 18.0);
  const Pose left_pose = scene.trajectory[0];
  Pose right_pose = left_pose;
  right_pose.translation.x() -= scene.rig.baseline_m;
  const double bf = scene.rig.baseline_m * scene.rig.intrinsics.fx;

  // Count left far-plane pixels whose right-view correspondence sees a
  // different surface; analytic geometry predicts a band of dn - df = 12 px.
  for (int y = 0; y < H; ++y) {
    int occluded = 0;
    for (int x = 0; x < W; ++x) {
      const double z = scene.surface_depth(left_pose, x, y);
      const double d = bf / z;
      const double xr = x - d;
      if (xr < 0.0) continue;
      const double zr = scene.surface_depth(right_pose, xr, y);
      if (std::abs(bf / zr - d) > 0.5) ++occluded;
    }
    CHECK(occluded >= 11);
    CHECK(occluded <= 13);
  }
}

TEST_CASE("left/right photoconsistency within one intensity level") {
  const int W = 192, H = 64;
  for (int variant = 0; variant < 2; ++variant) {
    const auto scene = variant == 0 ? make_plane_scene(W, H, 25.3)
                                    : make_ramp_scene(W, H, 12.0, 30.0);
    const auto r = render_stereo_pair(scene, scene.trajectory[0], 64);
    int checked = 0;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double d = r.gt_disparity.at(x, y);
        const double xr = x - d;
        const int x0 = static_cast<int>(std::floor(xr));
        if (x0 < 0 || x0 + 1 >= W) continue;
        const double f = xr - x0;
        const double sampled =
            (1.0 - f) * r.right.at(x0, y) + f * r.right.at(x0 + 1, y);
        CHECK(std::abs(sampled - r.left.at(x, y)) <= 1.0);
        ++checked;
      }
    CHECK(checked > 8000);
  }
}

TEST_CASE("seeded noise is bit-reproducible") {
  auto scene = make_plane_scene(48, 36, 20.0, 4, 0.02);
  scene.noise = {0.05, 0.1, 77};
  const auto a = render_sequence(scene);
  const auto b = render_sequence(scene);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frame.depth.data == b[i].frame.depth.data);
    CHECK(a[i].render.left.data == b[i].render.left.data);
    CHECK(a[i].render.right.data == b[i].render.right.data);
  }
}

TEST_CASE("outliers are uniformly placed (chi-square over a 4x4 grid)") {
  auto scene = make_plane_scene(128, 128, 20.0, 1);
  scene.noise = {0.0, 0.10, 5};
  const auto seq = render_sequence(scene);
  const DepthMap& noisy = seq[0].frame.depth;
  const DepthMap& gt = seq[0].render.gt_depth;

  double counts[16] = {0};
  int total = 0;
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      if (std::abs(noisy.at(x, y) - gt.at(x, y)) > 1e-6f) {
        ++counts[(y / 32) * 4 + (x / 32)];
        ++total;
      }
  CHECK(total > 1200);  // ~10% of 16384
  const double expected = total / 16.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 15 degrees of freedom; 0.999 quantile is 37.7.
  CHECK(chi2 < 37.7);
}

TEST_CASE("zero-noise ground truth is a fixed point of fusion") {
  auto scene = make_plane_scene(64, 48, 22.0, 3, 0.015);
  const auto seq = render_sequence(scene);
  std::vector<fusion::DepthFrame> frames;
  for (const auto& f : seq) frames.push_back(f.frame);
  const fusion::DepthFrame fused =
      fusion::fuse_frames(frames, scene.rig.intrinsics, fusion::FusionParams{});
  const DepthMap& gt = seq[1].render.gt_depth;
  int covered = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      if (!DepthMap::is_valid(fused.depth.at(x, y))) continue;
      CHECK(fused.depth.at(x, y) == doctest::Approx(gt.at(x, y)).epsilon(1e-6));
      ++covered;
    }
  CHECK(covered == 64 * 48);  // full plane coverage from the reference's own map
}

TEST_CASE("surface outside the representable disparity range raises") {
  const auto scene = make_plane_scene(32, 24, 25.0);
  CHECK_THROWS_AS(render_stereo_pair(scene, scene.trajectory[0], 20),
                  std::invalid_argument);  // d = 25 >= d_max = 20
}

TEST_CASE("dataset writer emits the ingestion layout") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rtdense_synth_ds";
  fs::remove_all(dir);
  auto scene = make_plane_scene(32, 24, 12.0, 3, 0.01);
  write_dataset(scene, dir);

  CHECK(fs::exists(dir / "calib.txt"));
  CHECK(fs::exists(dir / "poses.txt"));
  int left_count = 0;
  for (const auto& e : fs::directory_iterator(dir / "left")) {
    ++left_count;
    CHECK(e.path().extension() == ".png");
  }
  CHECK(left_count == 3);
  CHECK(read_trajectory(dir / "poses.txt").size() == 3);
  const Calibration calib = read_calibration(dir / "calib.txt");
  CHECK(calib.rig.intrinsics.width == 32);
  CHECK(fs::exists(dir / "gt" / "gt_000001.pfm"));
}

TEST_SUITE_END();
