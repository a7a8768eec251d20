#include "rtdense/fusion/fusion.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "rtdense/core/threading.hpp"

namespace rtdense::fusion {

FusionWindow::FusionWindow(int capacity) : capacity_(capacity) {
  if (capacity < 1 || capacity % 2 == 0)
    throw std::invalid_argument("fusion: window capacity must be odd and >= 1");
}

bool FusionWindow::push(DepthFrame frame) {
  if (!frames_.empty() && frame.frame_id <= frames_.back().frame_id)
    throw std::invalid_argument("fusion: frame_id must be strictly increasing");
  frames_.push_back(std::move(frame));
  if (static_cast<int>(frames_.size()) > capacity_) frames_.pop_front();
  return full();
}

RenderedView render_to_reference(const DepthFrame& src, const Pose& ref_pose,
                                 const Intrinsics& intr) {
  const int W = intr.width, H = intr.height;
  RenderedView out{DepthMap(W, H), ConfidenceMap(W, H, 0.0f)};

  // Z-buffer keyed by (depth bits << 32 | source index): taking the minimum
  // key keeps the nearest depth with a fixed tie-break on the source pixel,
  // so the result is identical for any thread interleaving. Positive float
  // bit patterns order like the floats themselves.
  const std::uint64_t empty = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::atomic<std::uint64_t>> zbuf(static_cast<std::size_t>(W) * H);
  for (auto& v : zbuf) v.store(empty, std::memory_order_relaxed);

  const Eigen::Matrix3d rel_r = ref_pose.rotation * src.pose.rotation.transpose();
  const Eigen::Vector3d rel_t =
      ref_pose.translation - rel_r * src.pose.translation;

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < src.depth.height; ++y) {
    for (int x = 0; x < src.depth.width; ++x) {
      const float z = src.depth.at(x, y);
      if (!DepthMap::is_valid(z)) continue;
      const Eigen::Vector3d p_ref =
          rel_r * backproject(x, y, z, intr) + rel_t;
      const auto pix = project(p_ref, intr);
      if (!pix) continue;
      const int u = static_cast<int>(std::lround(pix->u));
      const int v = static_cast<int>(std::lround(pix->v));
      if (u < 0 || u >= W || v < 0 || v >= H) continue;

      const float depth_ref = static_cast<float>(pix->depth);
      const std::uint32_t src_idx = static_cast<std::uint32_t>(y) * src.depth.width + x;
      const std::uint64_t key =
          (static_cast<std::uint64_t>(std::bit_cast<std::uint32_t>(depth_ref)) << 32) |
          src_idx;
      std::atomic<std::uint64_t>& slot = zbuf[static_cast<std::size_t>(v) * W + u];
      std::uint64_t cur = slot.load(std::memory_order_relaxed);
      while (key < cur &&
             !slot.compare_exchange_weak(cur, key, std::memory_order_relaxed)) {
      }
    }
  }

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int i = 0; i < W * H; ++i) {
    const std::uint64_t key = zbuf[i].load(std::memory_order_relaxed);
    if (key == empty) continue;
    out.depth.data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(key >> 32));
    out.confidence.data[i] = src.confidence.data[static_cast<std::uint32_t>(key)];
  }
  return out;
}

CandidateSet collect_candidates(const DepthFrame& reference,
                                std::span<const RenderedView> rendered,
                                std::span<const std::int64_t> rendered_ids) {
  const int W = reference.depth.width, H = reference.depth.height;
  const int n_frames = static_cast<int>(rendered.size()) + 1;
  CandidateSet set(W, H, 2 * n_frames);

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      auto push_if_valid = [&](float z, float c, std::int64_t id) {
        if (DepthMap::is_valid(z)) set.push(x, y, {z, c, id});
      };
      // Rendered frames with ids below the reference come first so the list
      // is ordered by source id regardless of input order.
      std::size_t k = 0;
      for (; k < rendered.size() && rendered_ids[k] < reference.frame_id; ++k)
        push_if_valid(rendered[k].depth.at(x, y), rendered[k].confidence.at(x, y),
                      rendered_ids[k]);
      push_if_valid(reference.depth.at(x, y), reference.confidence.at(x, y),
                    reference.frame_id);
      for (; k < rendered.size(); ++k)
        push_if_valid(rendered[k].depth.at(x, y), rendered[k].confidence.at(x, y),
                      rendered_ids[k]);
    }
  }
  return set;
}

void fuse_supports(std::span<DepthCandidate> candidates, const FusionParams& params) {
  constexpr int kMaxCandidates = 64;
  float blended_z[kMaxCandidates];
  float blended_c[kMaxCandidates];
  const int n = std::min<int>(static_cast<int>(candidates.size()), kMaxCandidates);

  for (int j = 0; j < n; ++j) {
    const double zj = candidates[j].depth;
    double conf_sum = 0.0, offset_sum = 0.0, plain_sum = 0.0;
    int supporters = 0;
    for (int i = 0; i < n; ++i) {
      const double zi = candidates[i].depth;
      if (std::abs(zi - zj) < params.epsilon) {
        const double ci = candidates[i].confidence;
        conf_sum += ci;
        offset_sum += ci * (zi - zj);
        plain_sum += zi - zj;
        ++supporters;
      }
    }
    if (conf_sum > 0.0) {
      blended_z[j] = static_cast<float>(zj + offset_sum / conf_sum);
    } else {
      blended_z[j] = static_cast<float>(zj + plain_sum / supporters);
    }
    blended_c[j] = static_cast<float>(conf_sum);
  }
  for (int j = 0; j < n; ++j) {
    candidates[j].depth = blended_z[j];
    candidates[j].confidence = blended_c[j];
  }
}

void apply_visibility_penalties(CandidateSet& candidates,
                                std::span<const RenderedView> rendered,
                                std::span<const DepthFrame* const> other_frames,
                                const Pose& ref_pose, const Intrinsics& intr,
                                const FusionParams& params) {
  const int W = candidates.width, H = candidates.height;
  const float eps = static_cast<float>(params.epsilon);

  // Precompute reference-to-other relative transforms for the free-space test.
  struct Relative {
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    const DepthFrame* frame;
  };
  std::vector<Relative> rel;
  rel.reserve(other_frames.size());
  for (const DepthFrame* f : other_frames) {
    const Eigen::Matrix3d r = f->pose.rotation * ref_pose.rotation.transpose();
    rel.push_back({r, f->pose.translation - r * ref_pose.translation, f});
  }

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      auto cands = candidates.at(x, y);
      for (DepthCandidate& cand : cands) {
        float penalty = 0.0f;

        // Occlusion: a rendered surface strictly in front of the candidate on
        // the reference ray.
        for (const RenderedView& view : rendered) {
          const float zk = view.depth.at(x, y);
          if (DepthMap::is_valid(zk) && zk < cand.depth - eps)
            penalty += view.confidence.at(x, y);
        }

        // Free-space violation: the candidate lands in front of another
        // frame's measured surface along that frame's ray.
        const Eigen::Vector3d p_ref = backproject(x, y, cand.depth, intr);
        for (const Relative& other : rel) {
          const Eigen::Vector3d p_other = other.r * p_ref + other.t;
          const auto pix = project(p_other, intr);
          if (!pix) continue;
          const int u = static_cast<int>(std::lround(pix->u));
          const int v = static_cast<int>(std::lround(pix->v));
          if (u < 0 || u >= other.frame->depth.width || v < 0 ||
              v >= other.frame->depth.height)
            continue;
          const float z_orig = other.frame->depth.at(u, v);
          if (DepthMap::is_valid(z_orig) &&
              static_cast<float>(pix->depth) < z_orig - eps)
            penalty += other.frame->confidence.at(u, v);
        }

        cand.confidence -= penalty;
      }
    }
  }
}

std::pair<DepthMap, ConfidenceMap> select_fused(const CandidateSet& candidates,
                                                const FusionParams& params) {
  const int W = candidates.width, H = candidates.height;
  DepthMap depth(W, H);
  ConfidenceMap conf(W, H, 0.0f);

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const auto cands = candidates.at(x, y);
      if (cands.empty()) continue;
      const DepthCandidate* best = &cands[0];
      for (const DepthCandidate& c : cands.subspan(1)) {
        if (c.confidence > best->confidence ||
            (c.confidence == best->confidence && c.depth < best->depth))
          best = &c;
      }
      if (static_cast<double>(best->confidence) < params.c_thres) continue;
      depth.at(x, y) = best->depth;
      conf.at(x, y) = std::max(best->confidence, 0.0f);
    }
  }
  return {std::move(depth), std::move(conf)};
}

namespace {

DepthFrame fuse_frame_ptrs(std::vector<const DepthFrame*> ordered,
                           const Intrinsics& intr, const FusionParams& params) {
  if (ordered.empty()) throw std::invalid_argument("fuse_frames: no frames");
  if (ordered.size() % 2 == 0)
    throw std::invalid_argument("fuse_frames: frame count must be odd");

  // Order by frame id so the result does not depend on the order given.
  std::sort(ordered.begin(), ordered.end(),
            [](const DepthFrame* a, const DepthFrame* b) {
              return a->frame_id < b->frame_id;
            });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i - 1]->frame_id == ordered[i]->frame_id)
      throw std::invalid_argument("fuse_frames: duplicate frame ids");

  const DepthFrame& reference = *ordered[ordered.size() / 2];

  std::vector<RenderedView> rendered;
  std::vector<std::int64_t> rendered_ids;
  std::vector<const DepthFrame*> others;
  for (const DepthFrame* f : ordered) {
    if (f == &reference) continue;
    rendered.push_back(render_to_reference(*f, reference.pose, intr));
    rendered_ids.push_back(f->frame_id);
    others.push_back(f);
  }

  CandidateSet candidates = collect_candidates(reference, rendered, rendered_ids);

#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int y = 0; y < candidates.height; ++y)
    for (int x = 0; x < candidates.width; ++x)
      fuse_supports(candidates.at(x, y), params);

  apply_visibility_penalties(candidates, rendered, others, reference.pose, intr,
                             params);

  auto [depth, conf] = select_fused(candidates, params);
  DepthFrame fused;
  fused.depth = std::move(depth);
  fused.confidence = std::move(conf);
  fused.pose = reference.pose;
  fused.frame_id = reference.frame_id;
  return fused;
}

}  // namespace

DepthFrame fuse_frames(std::span<const DepthFrame> frames, const Intrinsics& intr,
                       const FusionParams& params) {
  std::vector<const DepthFrame*> ptrs(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) ptrs[i] = &frames[i];
  return fuse_frame_ptrs(std::move(ptrs), intr, params);
}

DepthFrame fuse_window(const FusionWindow& window, const Intrinsics& intr,
                       const FusionParams& params) {
  if (!window.full()) throw std::invalid_argument("fuse_window: window not full");
  std::vector<const DepthFrame*> ptrs;
  ptrs.reserve(window.frames().size());
  for (const DepthFrame& f : window.frames()) ptrs.push_back(&f);
  return fuse_frame_ptrs(std::move(ptrs), intr, params);
}

}  // namespace rtdense::fusion
