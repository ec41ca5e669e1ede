#include "mvdepth/sequence_mapper.hpp"

#include "mvdepth/classical_depth.hpp"
#include "mvdepth/depthnet/train.hpp"
#include "mvdepth/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace mvdepth {

double view_angle_deg(const Pose& pose_i, const Pose& pose_j) {
  const Mat3 r_ji = pose_j.rotation().transpose() * pose_i.rotation();
  const double c = std::clamp(r_ji(2, 2), -1.0, 1.0);  // (R e_z) . e_z
  return std::acos(c) * 180.0 / std::numbers::pi;
}

double baseline(const Pose& pose_i, const Pose& pose_j) {
  return (pose_i.translation() - pose_j.translation()).norm();
}

KeyframeRing::KeyframeRing(SelectionThresholds thresholds, std::size_t capacity)
    : thresholds_(thresholds), capacity_(capacity) {
  if (capacity_ < 1) throw InvalidConfig("keyframe capacity must be at least 1");
  if (!(thresholds_.angle_deg >= 0.0) || !(thresholds_.baseline_m >= 0.0)) {
    throw InvalidConfig("selection thresholds must be non-negative");
  }
}

bool KeyframeRing::should_select(const Frame& frame) const {
  if (frames_.empty()) return true;
  const Pose& last = frames_.back().pose;
  return view_angle_deg(frame.pose, last) >= thresholds_.angle_deg - kThresholdSlack ||
         baseline(frame.pose, last) >= thresholds_.baseline_m - kThresholdSlack;
}

bool KeyframeRing::maybe_select(const Frame& frame) {
  if (!should_select(frame)) return false;
  frames_.push_back(frame);
  while (frames_.size() > capacity_) frames_.pop_front();
  return true;
}

Frame normalized(const Frame& frame, const NormalizationStats& stats) {
  Frame out = frame;
  out.image = normalize(frame.image, stats);
  return out;
}

ClassicalEstimator::ClassicalEstimator(DepthHypotheses hypotheses, int workers, bool refine)
    : hypotheses_(std::move(hypotheses)), workers_(workers), refine_(refine) {}

DepthMap ClassicalEstimator::estimate(const Frame& reference, std::span<const Frame> measurements) {
  // A single scalar normalization moves no argmin, so raw intensities are
  // matched directly.
  const CostVolume volume = build_cost_volume(reference, measurements, hypotheses_, workers_);
  return extract_depth(volume, refine_);
}

NetworkEstimator::NetworkEstimator(depthnet::Checkpoint checkpoint, double d_min, double d_max,
                                   int workers)
    : checkpoint_(std::move(checkpoint)),
      hypotheses_(sample_inverse_depths(
          d_min, d_max, static_cast<std::size_t>(checkpoint_.network.config().n_depth_samples))),
      workers_(workers) {}

DepthMap NetworkEstimator::estimate(const Frame& reference, std::span<const Frame> measurements) {
  const NormalizationStats& stats = checkpoint_.normalization;
  const Frame ref = normalized(reference, stats);
  std::vector<Frame> meas;
  for (const Frame& m : measurements) meas.push_back(normalized(m, stats));
  const CostVolume volume = build_cost_volume(ref, meas, hypotheses_, workers_);
  const auto x = depthnet::assemble_input<float>(ref.image, volume);
  const auto pred = checkpoint_.network.forward(x, {});
  const auto& xi = pred.scales[0];
  DepthMap out(volume.width, volume.height);
  for (int y = 0; y < volume.height; ++y) {
    for (int x_ = 0; x_ < volume.width; ++x_) {
      out.set(x_, y, 1.0 / static_cast<double>(xi.at(0, 0, y, x_)));
    }
  }
  return out;
}

SequenceMapper::SequenceMapper(std::unique_ptr<DepthEstimator> estimator,
                               SelectionThresholds thresholds)
    : estimator_(std::move(estimator)), ring_(thresholds, 2) {
  if (!estimator_) throw InvalidConfig("sequence mapper needs an estimator");
}

FrameResult SequenceMapper::process_frame(const Frame& frame) {
  FrameResult result;
  result.id = frame.id;
  const auto start = std::chrono::steady_clock::now();
  if (ring_.size() >= 2) {
    const std::vector<Frame> measurements(ring_.frames().end() - 2, ring_.frames().end());
    for (const Frame& m : measurements) result.measurement_ids.push_back(m.id);
    result.depth = estimator_->estimate(frame, measurements);
  }
  result.selected = ring_.maybe_select(frame);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace mvdepth
