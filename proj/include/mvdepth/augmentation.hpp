#pragma once

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/image.hpp"
#include "mvdepth/io/config.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvdepth {

struct PhotometricConfig {
  double noise_sigma = 0.0;  // additive Gaussian noise
  double brightness = 0.0;   // additive offset drawn from [-b, b]
  double contrast = 0.0;     // factor about 0.5 drawn from [1-c, 1+c]
  double color = 0.0;        // per-channel gain drawn from [1-g, 1+g]
};

struct AugmentationConfig {
  double depth_scale_min = 0.5;
  double depth_scale_max = 1.5;
  double spatial_scale_min = 1.0;
  double spatial_scale_max = 1.2;
  double flip_probability = 0.5;           // horizontal
  double vertical_flip_probability = 0.0;
  PhotometricConfig photometric;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;

  /// Keys: depth_scale_min/max, spatial_scale_min/max, flip_probability,
  /// vertical_flip_probability, noise_sigma, brightness, contrast, color,
  /// seed. Missing keys keep their defaults.
  static AugmentationConfig from_config(const io::KeyValueConfig& config);
};

/// Per-sample random choices. Each field is drawn independently.
struct AugmentationDraw {
  double depth_scale = 1.0;
  double spatial_scale = 1.0;
  bool flip_horizontal = false;
  bool flip_vertical = false;
  std::uint64_t photometric_seed = 0;
};

/// Deterministic in (config.seed, sample_index).
AugmentationDraw draw_augmentation(const AugmentationConfig& config, std::uint64_t sample_index);

struct WorldScaled {
  std::vector<Frame> frames;
  DepthMap gt;
};

/// Multiplies every pose translation and GT depth by `s`. Apply before
/// building the cost volume. Throws InvalidFactor unless s > 0.
WorldScaled scale_world(std::span<const Frame> frames, const DepthMap& gt, double s);

enum class FlipAxis { kHorizontal, kVertical };

struct AugmentedSample {
  CostVolume volume;
  Image reference;
  DepthMap gt;
};

/// Mirrors volume slices, valid counts, image and GT about the same axis.
/// Throws ShapeMismatch when the three disagree in size.
AugmentedSample flip_sample(const CostVolume& volume, const Image& reference, const DepthMap& gt,
                            FlipAxis axis);

/// Enlarges all three by `factor` about the image center and crops back to
/// the original size: bilinear for costs and image, nearest for valid counts,
/// nearest valid pixel for GT. Depth values are not changed. Throws
/// InvalidFactor outside [1, 2] and ShapeMismatch.
AugmentedSample spatial_scale_sample(const CostVolume& volume, const Image& reference,
                                     const DepthMap& gt, double factor);

/// Contrast, brightness, color gain and noise, in that order, then clamping
/// to [0, 1]. Disabled components leave values untouched.
Image photometric_augment(const Image& image, const PhotometricConfig& config, std::uint64_t seed);

}  // namespace mvdepth
