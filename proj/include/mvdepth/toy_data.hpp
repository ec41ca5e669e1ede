#pragma once

// Small synthetic training set for the toy network: one randomly tilted
// textured plane per sample, a reference view at the origin and one
// translated measurement view.

#include "mvdepth/augmentation.hpp"
#include "mvdepth/depthnet/train.hpp"
#include "mvdepth/geometry.hpp"
#include "mvdepth/image.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mvdepth {

struct ToyDataConfig {
  int count = 8;
  int width = 64;
  int height = 48;
  int n_depth_samples = 64;
  double d_min = 0.5;
  double d_max = 50.0;
  double baseline_m = 0.1;
  double plane_depth_min = 1.0;
  double plane_depth_max = 3.0;
  double max_tilt_deg = 30.0;
  std::uint64_t seed = 1;
  /// Sample i uses draw_augmentation(*augmentation, i): photometric changes
  /// on the raw views, world scaling before the volume is built, then flips
  /// and spatial scaling of the finished triple.
  std::optional<AugmentationConfig> augmentation;
};

struct ToyDataset {
  std::vector<depthnet::TrainingSample> samples;
  NormalizationStats normalization;
  DepthHypotheses hypotheses;
  Intrinsics intrinsics;
};

/// Throws InvalidConfig.
ToyDataset make_toy_dataset(const ToyDataConfig& config);

}  // namespace mvdepth
