#include <doctest.h>

#include <cmath>
#include <random>

#include "rtdense/core/threading.hpp"
#include "rtdense/stereo/stereo.hpp"
#include "rtdense/synth/synth.hpp"
#include "oracles.hpp"

using namespace rtdense;
using namespace rtdense::stereo;

TEST_SUITE_BEGIN("stereo");

TEST_CASE("cost volume: identical constant images give zero cost") {
  const GrayImage img(32, 16, 128);
  StereoConfig cfg;
  cfg.d_max = 8;
  cfg.window_radius = 1;
  const CostVolume vol = compute_cost_volume(img, img, cfg);
  for (int y = 0; y < vol.height; ++y)
    for (int x = 0; x < vol.width; ++x)
      for (int d = 0; d < vol.d_max; ++d) {
        if (x - d < 0)
          CHECK(vol.at(x, y, d) == kSentinelCost);
        else
          CHECK(vol.at(x, y, d) == 0);
      }
}

TEST_CASE("cost volume: 1x1 window degenerates to a single absolute difference") {
  const GrayImage left = oracles::random_image(24, 10, 101);
  const GrayImage right = oracles::random_image(24, 10, 202);
  StereoConfig cfg;
  cfg.d_max = 6;
  cfg.window_radius = 0;
  const CostVolume vol = compute_cost_volume(left, right, cfg);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 24; ++x)
      for (int d = 0; d <= std::min(x, 5); ++d)
        CHECK(vol.at(x, y, d) ==
              std::abs(static_cast<int>(left.at(x, y)) - right.at(x - d, y)));
}

TEST_CASE("cost volume: sliding box sums equal the naive window oracle bit-exactly") {
  for (int radius : {0, 1, 2, 3, 4}) {
    for (std::uint32_t seed : {7u, 8u}) {
      const GrayImage left = oracles::random_image(64, 48, seed);
      const GrayImage right = oracles::random_image(64, 48, seed + 1000);
      StereoConfig cfg;
      cfg.d_max = 16;
      cfg.window_radius = radius;
      const CostVolume fast = compute_cost_volume(left, right, cfg);
      const CostVolume naive = oracles::naive_sad_volume(left, right, 16, radius);
      REQUIRE(fast.cost == naive.cost);
    }
  }
}

TEST_CASE("cost volume: size mismatch raises") {
  const GrayImage a(10, 10, 0), b(12, 10, 0);
  CHECK_THROWS_AS(compute_cost_volume(a, b, StereoConfig{.d_max = 4}),
                  std::invalid_argument);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(StereoConfig{.d_max = 1}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(StereoConfig{.window_radius = 8}.validate(), std::invalid_argument);
  CHECK_THROWS_AS((StereoConfig{.sgm = {10, 10}}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((StereoConfig{.sgm = {10, 3000}}).validate(), std::invalid_argument);
  CHECK_NOTHROW(StereoConfig{}.validate());
}

TEST_CASE("sgm: single-pixel volume aggregates to 4x the raw cost") {
  CostVolume vol(1, 1, 5);
  for (int d = 0; d < 5; ++d) vol.at(0, 0, d) = static_cast<std::uint16_t>(3 * d + 1);
  const AggregatedVolume agg = sgm_optimize(vol, SgmParams{});
  for (int d = 0; d < 5; ++d) CHECK(agg.at(0, 0, d) == 4u * (3 * d + 1));
}

TEST_CASE("sgm: zero-cost disparity wins everywhere") {
  const int W = 20, H = 12, D = 8, d_star = 5;
  CostVolume vol(W, H, D, 100);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) vol.at(x, y, d_star) = 0;
  const AggregatedVolume agg = sgm_optimize(vol, SgmParams{});
  StereoConfig cfg;
  cfg.d_max = D;
  const auto [disp, conf] = select_disparity(agg, cfg);
  for (int y = 0; y < H; ++y)
    for (int x = d_star; x < W; ++x)  // d* is realizable only where x >= d*
      CHECK(static_cast<int>(std::lround(disp.at(x, y))) == d_star);
}

TEST_CASE("sgm: directional path costs match the literal recurrence oracle") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> cost_dist(0, 2295);
  const SgmParams params{10, 120};

  SUBCASE("random single scanlines, left-to-right") {
    for (int trial = 0; trial < 50; ++trial) {
      CostVolume vol(32, 1, 8);
      for (auto& c : vol.cost) c = static_cast<std::uint16_t>(cost_dist(rng));
      const AggregatedVolume fast = sgm_path_costs(vol, params, 1, 0);
      const AggregatedVolume naive = oracles::naive_sgm_path(vol, params, 1, 0);
      REQUIRE(fast.cost == naive.cost);
    }
  }

  SUBCASE("all four directions on a 2D volume with sentinels") {
    const GrayImage left = oracles::random_image(40, 30, 5);
    const GrayImage right = oracles::random_image(40, 30, 6);
    StereoConfig cfg;
    cfg.d_max = 12;
    const CostVolume vol = compute_cost_volume(left, right, cfg);
    for (const auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const AggregatedVolume fast = sgm_path_costs(vol, params, dx, dy);
      const AggregatedVolume naive = oracles::naive_sgm_path(vol, params, dx, dy);
      REQUIRE(fast.cost == naive.cost);
    }
  }

  SUBCASE("sgm_optimize equals the sum of the four directional oracles") {
    const GrayImage left = oracles::random_image(24, 18, 9);
    const GrayImage right = oracles::random_image(24, 18, 10);
    StereoConfig cfg;
    cfg.d_max = 8;
    const CostVolume vol = compute_cost_volume(left, right, cfg);
    const AggregatedVolume agg = sgm_optimize(vol, params);
    AggregatedVolume sum(vol.width, vol.height, vol.d_max, 0);
    for (const auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const AggregatedVolume path = oracles::naive_sgm_path(vol, params, dx, dy);
      for (std::size_t i = 0; i < sum.cost.size(); ++i) sum.cost[i] += path.cost[i];
    }
    REQUIRE(agg.cost == sum.cost);
  }
}

namespace {

// One-pixel aggregated volume with given costs at pixel x = width-1 so all
// disparities are realizable.
std::pair<DisparityMap, ConfidenceMap> select_single(std::vector<std::uint32_t> costs,
                                                     float pkrn_floor = 1.0f) {
  const int D = static_cast<int>(costs.size());
  AggregatedVolume vol(D, 1, D, 0);
  for (int x = 0; x < D; ++x)
    for (int d = 0; d < D; ++d) vol.at(x, 0, d) = costs[d];
  StereoConfig cfg;
  cfg.d_max = D;
  cfg.pkrn_floor = pkrn_floor;
  auto [disp, conf] = select_disparity(vol, cfg);
  DisparityMap d1(1, 1);
  ConfidenceMap c1(1, 1);
  d1.at(0, 0) = disp.at(D - 1, 0);
  c1.at(0, 0) = conf.at(D - 1, 0);
  return {d1, c1};
}

}  // namespace

TEST_CASE("select: symmetric parabola gives zero sub-pixel offset") {
  const auto [disp, conf] = select_single({9, 4, 2, 4, 9});
  CHECK(disp.at(0, 0) == 2.0f);
}

TEST_CASE("select: asymmetric parabola gives the textbook offset") {
  // Costs around the minimum are (4, 2, 3): offset = (4-3)/(2*(4-4+3)) = 1/6.
  const auto [disp, conf] = select_single({9, 4, 2, 3, 9});
  CHECK(disp.at(0, 0) == static_cast<float>(2.0 + 1.0 / 6.0));
}

TEST_CASE("select: PKRN confidence") {
  const auto [disp, conf] = select_single({2, 4, 6, 8, 10});
  CHECK(conf.at(0, 0) == doctest::Approx(0.5));  // PKRN = 4/2

  SUBCASE("all-zero costs floor to confidence 0") {
    const auto [d2, c2] = select_single({0, 0, 0, 0});
    CHECK(c2.at(0, 0) == 0.0f);
  }
  SUBCASE("perfect match with distinct second-best") {
    const auto [d3, c3] = select_single({0, 5, 7, 9});
    CHECK(c3.at(0, 0) == doctest::Approx(1.0 - 1.0 / 5.0));
  }
}

TEST_CASE("select: sub-pixel skipped at disparity-range borders") {
  const auto [d0, c0] = select_single({1, 5, 9, 13});
  CHECK(d0.at(0, 0) == 0.0f);
  const auto [d1, c1] = select_single({13, 9, 5, 1});
  CHECK(d1.at(0, 0) == 3.0f);
}

TEST_CASE("select: argmin ties break toward the smaller disparity") {
  const auto [disp, conf] = select_single({7, 3, 3, 9});
  CHECK(static_cast<int>(disp.at(0, 0)) == 1);
}

TEST_CASE("lr filter") {
  const int W = 40, H = 6;
  SUBCASE("consistent constant-disparity pair keeps the visible region") {
    DisparityMap left(W, H, 5.0f), right(W, H, 5.0f);
    const DisparityMap out = lr_consistency_filter(left, right, 1.0f);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        if (x >= 5)
          CHECK(out.at(x, y) == 5.0f);
        else
          CHECK(!DisparityMap::is_valid(out.at(x, y)));  // no right partner
      }
  }
  SUBCASE("infinite threshold disables the filter") {
    DisparityMap left(W, H, 5.0f), right(W, H, 9.0f);
    left.at(3, 3) = DisparityMap::kInvalid;
    const DisparityMap out =
        lr_consistency_filter(left, right, std::numeric_limits<float>::infinity());
    CHECK(out.data == left.data);
  }
  SUBCASE("inconsistent pixels are invalidated") {
    DisparityMap left(W, H, 5.0f), right(W, H, 5.0f);
    for (int y = 0; y < H; ++y)
      for (int x = 18; x < 22; ++x) right.at(x, y) = 9.0f;
    const DisparityMap out = lr_consistency_filter(left, right, 1.0f);
    for (int y = 0; y < H; ++y) {
      CHECK(!DisparityMap::is_valid(out.at(23, y)));  // x - 5 lands in the band
      CHECK(out.at(28, y) == 5.0f);
    }
  }
}

TEST_CASE("lr filter: occluded band of a step scene is invalidated") {
  // Near plane (d=30) right of center occludes a (30-18)=12 px band of the
  // far plane (d=18) in the right view, immediately left of the split.
  const int W = 160, H = 40;
  const auto scene = synth::make_step_scene(W, H, 30.0, 18.0, 1);
  const auto render = synth::render_stereo_pair(scene, scene.trajectory[0], 64);
  const Pose right_pose = [&] {
    Pose p = scene.trajectory[0];
    p.translation.x() -= scene.rig.baseline_m;
    return p;
  }();

  // Analytic disparity maps of both views.
  DisparityMap left_disp(W, H), right_disp(W, H);
  const double bf = scene.rig.baseline_m * scene.rig.intrinsics.fx;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      left_disp.at(x, y) =
          static_cast<float>(bf / scene.surface_depth(scene.trajectory[0], x, y));
      right_disp.at(x, y) =
          static_cast<float>(bf / scene.surface_depth(right_pose, x, y));
    }

  const DisparityMap filtered = lr_consistency_filter(left_disp, right_disp, 0.75f);

  // Ground-truth visibility from the analytic geometry: a left pixel is
  // occluded iff the right camera sees a different surface at x - d.
  int checked = 0;
  for (int y = 0; y < H; ++y)
    for (int x = 40; x < W; ++x) {
      const double d = left_disp.at(x, y);
      const int xr = static_cast<int>(std::lround(x - d));
      if (xr < 0) continue;
      const bool occluded = std::abs(right_disp.at(xr, y) - d) > 0.75;
      CHECK(DisparityMap::is_valid(filtered.at(x, y)) == !occluded);
      ++checked;
    }
  CHECK(checked > 1000);

  // The occluded band has the expected width on each row.
  for (int y = 0; y < H; ++y) {
    int invalid_run = 0;
    for (int x = 40; x < W; ++x)
      if (!DisparityMap::is_valid(filtered.at(x, y))) ++invalid_run;
    CHECK(invalid_run >= 11);
    CHECK(invalid_run <= 13);
  }
}

TEST_CASE("stereo_match: fronto-parallel plane at integer disparity") {
  const auto scene = synth::make_plane_scene(160, 120, 25.0, 1);
  const auto render = synth::render_stereo_pair(scene, scene.trajectory[0], 64);
  StereoConfig cfg;
  cfg.d_max = 64;
  const auto [depth, conf] = stereo_match(render.left, render.right, scene.rig, cfg);

  const double z_expected = scene.rig.baseline_m * scene.rig.intrinsics.fx / 25.0;
  int valid = 0, good = 0;
  std::vector<double> depths;
  for (int y = 4; y < 116; ++y)
    for (int x = 68; x < 156; ++x) {  // interior, right of the max-disparity margin
      const float z = depth.at(x, y);
      if (!DepthMap::is_valid(z)) continue;
      ++valid;
      const double d = depth_to_disparity(z, scene.rig);
      if (std::abs(d - 25.0) <= 0.5) ++good;
      depths.push_back(z);
    }
  REQUIRE(valid > 5000);
  CHECK(static_cast<double>(good) / valid >= 0.95);

  std::nth_element(depths.begin(), depths.begin() + depths.size() / 2, depths.end());
  CHECK(depths[depths.size() / 2] ==
        doctest::Approx(z_expected).epsilon(0.01));  // median within 1%
}

TEST_CASE("stereo_match: textureless images yield near-zero confidence") {
  const GrayImage flat(64, 48, 77);
  const StereoRig rig = synth::make_rig(64, 48);
  StereoConfig cfg;
  cfg.d_max = 16;
  cfg.lr_threshold = std::numeric_limits<float>::infinity();
  const auto [depth, conf] = stereo_match(flat, flat, rig, cfg);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) CHECK(conf.at(x, y) < 0.05f);
}

TEST_CASE("confidence stays in [0, 1)") {
  const GrayImage left = oracles::random_image(48, 32, 31);
  const GrayImage right = oracles::random_image(48, 32, 32);
  StereoConfig cfg;
  cfg.d_max = 12;
  const AggregatedVolume agg = sgm_optimize(compute_cost_volume(left, right, cfg), cfg.sgm);
  const auto [disp, conf] = select_disparity(agg, cfg);
  for (float c : conf.data) {
    CHECK(c >= 0.0f);
    CHECK(c < 1.0f);
  }
  for (float d : disp.data) {
    CHECK(d >= 0.0f);
    CHECK(d < 12.0f);
  }
}

TEST_CASE("sub-pixel offsets stay within half a pixel") {
  const auto scene = synth::make_ramp_scene(96, 64, 8.0, 28.0, 1);
  const auto render = synth::render_stereo_pair(scene, scene.trajectory[0], 32);
  StereoConfig cfg;
  cfg.d_max = 32;
  const AggregatedVolume agg =
      sgm_optimize(compute_cost_volume(render.left, render.right, cfg), cfg.sgm);
  const auto [disp, conf] = select_disparity(agg, cfg);
  for (float d : disp.data) {
    const float frac = d - std::floor(d);
    const float offset = frac <= 0.5f ? frac : 1.0f - frac;
    CHECK(offset <= 0.5f);
  }
}

TEST_CASE("raising p2 does not add disparity discontinuities") {
  StereoConfig lo, hi;
  lo.d_max = hi.d_max = 16;
  lo.sgm.p2 = 60;
  hi.sgm.p2 = 400;
  lo.lr_threshold = hi.lr_threshold = std::numeric_limits<float>::infinity();

  auto count_jumps = [&](const StereoConfig& cfg, std::uint32_t seed) {
    const GrayImage left = oracles::random_image(48, 32, seed);
    const GrayImage right = oracles::random_image(48, 32, seed + 50);
    const AggregatedVolume agg =
        sgm_optimize(compute_cost_volume(left, right, cfg), cfg.sgm);
    const auto [disp, conf] = select_disparity(agg, cfg);
    long jumps = 0;
    for (int y = 0; y < disp.height; ++y)
      for (int x = 1; x < disp.width; ++x)
        if (std::abs(disp.at(x, y) - disp.at(x - 1, y)) > 1.0f) ++jumps;
    return jumps;
  };

  long total_lo = 0, total_hi = 0;
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    total_lo += count_jumps(lo, seed);
    total_hi += count_jumps(hi, seed);
  }
  CHECK(total_hi <= total_lo);
}

TEST_CASE("stereo_match is bit-deterministic across thread budgets") {
  const auto scene = synth::make_plane_scene(96, 72, 17.0, 1);
  const auto render = synth::render_stereo_pair(scene, scene.trajectory[0], 32);
  StereoConfig cfg;
  cfg.d_max = 32;

  set_thread_count(1);
  const auto [d1, c1] = stereo_match(render.left, render.right, scene.rig, cfg);
  set_thread_count(4);
  const auto [d4, c4] = stereo_match(render.left, render.right, scene.rig, cfg);
  set_thread_count(0);
  REQUIRE(d1.data == d4.data);
  REQUIRE(c1.data == c4.data);
}

TEST_SUITE_END();
