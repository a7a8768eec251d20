#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "rtdense/core/geometry.hpp"
#include "rtdense/core/types.hpp"

namespace rtdense::fusion {

/// One posed depth estimate flowing through the fusion window. Depth and
/// confidence live in the frame's own camera (Z^o); the pose maps world to
/// that camera.
struct DepthFrame {
  DepthMap depth;
  ConfidenceMap confidence;
  Pose pose;
  std::int64_t frame_id = 0;

  bool consistent() const {
    return depth.same_size(confidence) && pose.is_valid(1e-6);
  }
};

struct FusionParams {
  double epsilon = 0.04;  // support radius, meters
  double c_thres = 0.5;   // fused-confidence threshold for outlier rejection
};

/// A source depth map reprojected onto the reference view: per reference
/// pixel the nearest depth (in reference camera coordinates) and the
/// confidence that came with it.
struct RenderedView {
  DepthMap depth;
  ConfidenceMap confidence;
};

/// One depth hypothesis at a reference pixel. `depth` starts as the rendered
/// or direct estimate and becomes the support-blended value; `confidence`
/// accumulates supports and penalties.
struct DepthCandidate {
  float depth = 0.0f;
  float confidence = 0.0f;
  std::int64_t source_frame = 0;
};

/// Per-pixel candidate lists in fixed-capacity slots (no per-pixel
/// allocation). Within a pixel, candidates are ordered by source frame id.
struct CandidateSet {
  int width = 0;
  int height = 0;
  int capacity = 0;
  std::vector<DepthCandidate> slots;  // pixel-major
  std::vector<std::uint8_t> counts;

  CandidateSet() = default;
  CandidateSet(int w, int h, int cap)
      : width(w), height(h), capacity(cap),
        slots(static_cast<std::size_t>(w) * h * cap),
        counts(static_cast<std::size_t>(w) * h, 0) {}

  std::span<DepthCandidate> at(int x, int y) {
    const std::size_t pix = static_cast<std::size_t>(y) * width + x;
    return {slots.data() + pix * capacity, counts[pix]};
  }
  std::span<const DepthCandidate> at(int x, int y) const {
    const std::size_t pix = static_cast<std::size_t>(y) * width + x;
    return {slots.data() + pix * capacity, counts[pix]};
  }
  void push(int x, int y, const DepthCandidate& c) {
    const std::size_t pix = static_cast<std::size_t>(y) * width + x;
    if (counts[pix] < capacity) slots[pix * capacity + counts[pix]++] = c;
  }
};

/// Sliding buffer of depth frames with the middle frame as reference. Frames
/// arrive with strictly increasing ids; once full, each push evicts the
/// oldest frame and exposes a new reference.
class FusionWindow {
 public:
  explicit FusionWindow(int capacity);

  /// Returns true when a (new) reference frame is ready for fusion, i.e. the
  /// window is full. Throws std::invalid_argument on non-monotonic frame ids.
  bool push(DepthFrame frame);

  bool full() const { return static_cast<int>(frames_.size()) == capacity_; }
  int capacity() const { return capacity_; }
  std::size_t size() const { return frames_.size(); }
  const std::deque<DepthFrame>& frames() const { return frames_; }
  const DepthFrame& reference() const { return frames_[capacity_ / 2]; }

 private:
  int capacity_;
  std::deque<DepthFrame> frames_;
};

/// Reprojects every valid source pixel into the reference view, keeping the
/// nearest depth per reference pixel (z-buffer, 1-pixel splats). Points
/// behind the reference camera or outside the image are dropped.
RenderedView render_to_reference(const DepthFrame& src, const Pose& ref_pose,
                                 const Intrinsics& intr);

/// Candidate lists on the reference grid: the reference frame's own estimate
/// plus one rendered estimate per other frame, ordered by source frame id.
CandidateSet collect_candidates(const DepthFrame& reference,
                                std::span<const RenderedView> rendered,
                                std::span<const std::int64_t> rendered_ids);

/// Support blending at one pixel (Z within epsilon of each other supports):
/// each candidate becomes the confidence-weighted average of its supporters
/// and its confidence the sum of supporting confidences. All-zero supporter
/// confidence degrades to the unweighted mean with confidence 0.
void fuse_supports(std::span<DepthCandidate> candidates, const FusionParams& params);

/// Visibility conflicts reduce confidences, never depths. Occlusion: a
/// rendered depth in front of a candidate (along the reference ray, beyond
/// epsilon) subtracts its rendered confidence. Free-space violation: a
/// candidate projecting in front of another frame's original depth (along
/// that frame's ray, beyond epsilon) subtracts that frame's original
/// confidence.
void apply_visibility_penalties(CandidateSet& candidates,
                                std::span<const RenderedView> rendered,
                                std::span<const DepthFrame* const> other_frames,
                                const Pose& ref_pose, const Intrinsics& intr,
                                const FusionParams& params);

/// Per pixel, the candidate with the highest final confidence wins (ties go
/// to the smaller depth); pixels whose winner stays below c_thres, or with no
/// candidates at all, come out invalid. Emitted confidence is clamped at 0.
std::pair<DepthMap, ConfidenceMap> select_fused(const CandidateSet& candidates,
                                                const FusionParams& params);

/// Full fusion of a set of frames onto the middle one (by frame id). The
/// result is independent of the order frames are passed in.
DepthFrame fuse_frames(std::span<const DepthFrame> frames, const Intrinsics& intr,
                       const FusionParams& params);

DepthFrame fuse_window(const FusionWindow& window, const Intrinsics& intr,
                       const FusionParams& params);

}  // namespace rtdense::fusion
