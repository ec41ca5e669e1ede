#pragma once

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/depthnet/checkpoint.hpp"
#include "mvdepth/geometry.hpp"
#include "mvdepth/image.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mvdepth {

/// Angle in degrees between the optical axes of two cameras:
/// arccos((R_j^-1 R_i [0 0 1]^T) . [0 0 1]^T), argument clamped to [-1, 1].
double view_angle_deg(const Pose& pose_i, const Pose& pose_j);

/// Distance between the camera centers.
double baseline(const Pose& pose_i, const Pose& pose_j);

struct SelectionThresholds {
  double angle_deg = 15.0;
  double baseline_m = 0.3;
};

/// Thresholds are compared with this much slack so that accumulated
/// rounding (three 0.1 m steps give 0.2999...) does not delay a selection.
inline constexpr double kThresholdSlack = 1e-9;

/// The most recent selected measurement frames, oldest first.
class KeyframeRing {
 public:
  explicit KeyframeRing(SelectionThresholds thresholds = {}, std::size_t capacity = 2);

  /// True for the first frame, then whenever the view angle or baseline to
  /// the last selected frame reaches its threshold.
  bool should_select(const Frame& frame) const;
  /// Inserts the frame when should_select() holds, dropping the oldest entry
  /// beyond capacity. Returns the decision.
  bool maybe_select(const Frame& frame);

  const std::deque<Frame>& frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  const SelectionThresholds& thresholds() const { return thresholds_; }

 private:
  SelectionThresholds thresholds_;
  std::size_t capacity_;
  std::deque<Frame> frames_;
};

/// Produces a depth map for a reference frame from measurement frames. Both
/// take raw images in [0, 1]; normalization happens inside.
class DepthEstimator {
 public:
  virtual ~DepthEstimator() = default;
  virtual std::string name() const = 0;
  virtual DepthMap estimate(const Frame& reference, std::span<const Frame> measurements) = 0;
};

/// Cost volume followed by winner-take-all with parabolic refinement.
/// Pixels no measurement frame sees stay invalid.
class ClassicalEstimator : public DepthEstimator {
 public:
  ClassicalEstimator(DepthHypotheses hypotheses, int workers = 1, bool refine = true);
  std::string name() const override { return "classical"; }
  DepthMap estimate(const Frame& reference, std::span<const Frame> measurements) override;

 private:
  DepthHypotheses hypotheses_;
  int workers_;
  bool refine_;
};

/// Cost volume plus reference image through the network; the finest inverse
/// depth map is inverted into a fully dense depth map. Image sizes must be
/// multiples of 8 (ShapeMismatch otherwise).
class NetworkEstimator : public DepthEstimator {
 public:
  NetworkEstimator(depthnet::Checkpoint checkpoint, double d_min, double d_max, int workers = 1);
  std::string name() const override { return "network"; }
  DepthMap estimate(const Frame& reference, std::span<const Frame> measurements) override;

 private:
  depthnet::Checkpoint checkpoint_;
  DepthHypotheses hypotheses_;
  int workers_;
};

/// Normalizes a frame's image with `stats`.
Frame normalized(const Frame& frame, const NormalizationStats& stats);

struct FrameResult {
  std::string id;
  bool selected = false;
  std::vector<std::string> measurement_ids;  // empty when no depth was produced
  std::optional<DepthMap> depth;
  double seconds = 0.0;
};

/// Sequence mode: every frame is first estimated against the two most
/// recent keyframes (once two exist), then offered to the keyframe ring.
class SequenceMapper {
 public:
  SequenceMapper(std::unique_ptr<DepthEstimator> estimator, SelectionThresholds thresholds = {});

  FrameResult process_frame(const Frame& frame);
  const KeyframeRing& ring() const { return ring_; }
  const DepthEstimator& estimator() const { return *estimator_; }

 private:
  std::unique_ptr<DepthEstimator> estimator_;
  KeyframeRing ring_;
};

}  // namespace mvdepth
