#pragma once

#include "mvdepth/depthnet/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mvdepth::depthnet {

/// Largest acceptable relative error of a passing check.
inline constexpr double kGradCheckTolerance = 1e-4;

struct GradCheckConfig {
  int width = 32;
  int height = 32;
  int batch = 4;
  int n_depth_samples = 64;
  Rational channel_width_scale{1, 8};
  int parameters = 20;
  double step = 1e-5;
  std::uint64_t seed = 7;
};

struct GradCheckEntry {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  int kinks_skipped = 0;  // draws rejected because a ReLU or L1 sign flipped
};

/// |a - n| / max(|a|, |n|); zero when both magnitudes are below 1e-9.
double gradient_relative_error(double analytic, double numeric);

/// Builds a double-precision network, feeds random inputs and ground truth,
/// and compares backward() against central differences of the multi-scale
/// loss for randomly chosen parameter entries. Batch norm runs in training
/// mode without touching its running statistics. A draw whose perturbation
/// flips any ReLU input or L1 residual sign is rejected and redrawn.
GradCheckReport gradient_check(const GradCheckConfig& config);

}  // namespace mvdepth::depthnet
