#include "mvdepth/toy_data.hpp"

#include "mvdepth/augmentation.hpp"
#include "mvdepth/cost_volume.hpp"
#include "mvdepth/errors.hpp"
#include "mvdepth/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace mvdepth {

ToyDataset make_toy_dataset(const ToyDataConfig& config) {
  if (config.count < 1) throw InvalidConfig("toy dataset needs at least one sample");
  if (!(config.plane_depth_min > 0.0 && config.plane_depth_min <= config.plane_depth_max)) {
    throw InvalidConfig("toy plane depth range is invalid");
  }
  ToyDataset data;
  data.hypotheses = sample_inverse_depths(config.d_min, config.d_max,
                                          static_cast<std::size_t>(config.n_depth_samples));
  Intrinsics& k = data.intrinsics;
  k.width = config.width;
  k.height = config.height;
  k.fx = k.fy = 0.8 * config.width;
  k.cx = 0.5 * (config.width - 1);
  k.cy = 0.5 * (config.height - 1);
  k.validate();

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double deg = std::numbers::pi / 180.0;

  if (config.augmentation) config.augmentation->validate();

  std::vector<std::pair<RenderedFrame, RenderedFrame>> views;
  std::vector<Image> images;
  for (int i = 0; i < config.count; ++i) {
    const double depth =
        config.plane_depth_min + (config.plane_depth_max - config.plane_depth_min) * unit(rng);
    const double tilt_x = (2.0 * unit(rng) - 1.0) * config.max_tilt_deg * deg;
    const double tilt_y = (2.0 * unit(rng) - 1.0) * config.max_tilt_deg * deg;
    const double direction = 2.0 * std::numbers::pi * unit(rng);
    const Mat3 tilt = rotation_about(Vec3::UnitX(), tilt_x) * rotation_about(Vec3::UnitY(), tilt_y);

    TexturedPlane plane;
    plane.origin = Vec3(0.0, 0.0, depth);
    plane.axis_u = tilt * Vec3::UnitX();
    plane.axis_v = tilt * Vec3::UnitY();
    plane.texel_size = depth / k.fx;
    plane.texture = std::make_shared<const Texture>(make_texture(rng(), 128, 16));

    SyntheticScene scene;
    scene.intrinsics = k;
    scene.planes = {plane};
    scene.trajectory = {Pose(), Pose(Mat3::Identity(), config.baseline_m * Vec3(std::cos(direction),
                                                                                std::sin(direction), 0.0))};
    views.emplace_back(render_scene(scene, 0), render_scene(scene, 1));
    if (config.augmentation) {
      const AugmentationDraw draw =
          draw_augmentation(*config.augmentation, static_cast<std::uint64_t>(i));
      const PhotometricConfig& photo = config.augmentation->photometric;
      auto& [ref, meas] = views.back();
      ref.frame.image = photometric_augment(ref.frame.image, photo, draw.photometric_seed);
      meas.frame.image = photometric_augment(meas.frame.image, photo, draw.photometric_seed + 1);
    }
    images.push_back(views.back().first.frame.image);
    images.push_back(views.back().second.frame.image);
  }
  data.normalization = compute_normalization(images);

  for (std::size_t i = 0; i < views.size(); ++i) {
    auto& [ref, meas] = views[i];
    std::vector<Frame> frames{ref.frame, meas.frame};
    DepthMap gt = std::move(ref.depth);
    AugmentationDraw draw;
    if (config.augmentation) {
      draw = draw_augmentation(*config.augmentation, i);
      WorldScaled scaled = scale_world(frames, gt, draw.depth_scale);
      frames = std::move(scaled.frames);
      gt = std::move(scaled.gt);
    }
    for (Frame& f : frames) f.image = normalize(f.image, data.normalization);
    depthnet::TrainingSample s;
    s.volume = build_cost_volume(frames[0], std::span<const Frame>(&frames[1], 1), data.hypotheses);
    s.reference = std::move(frames[0].image);
    s.gt = std::move(gt);
    if (config.augmentation) {
      AugmentedSample a{std::move(s.volume), std::move(s.reference), std::move(s.gt)};
      if (draw.flip_horizontal) a = flip_sample(a.volume, a.reference, a.gt, FlipAxis::kHorizontal);
      if (draw.flip_vertical) a = flip_sample(a.volume, a.reference, a.gt, FlipAxis::kVertical);
      if (draw.spatial_scale != 1.0) {
        a = spatial_scale_sample(a.volume, a.reference, a.gt, draw.spatial_scale);
      }
      s.volume = std::move(a.volume);
      s.reference = std::move(a.reference);
      s.gt = std::move(a.gt);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace mvdepth
