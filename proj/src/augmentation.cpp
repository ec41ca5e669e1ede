#include "mvdepth/augmentation.hpp"

#include "mvdepth/errors.hpp"
#include "mvdepth/kernels/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mvdepth {

void AugmentationConfig::validate() const {
  auto range = [](double lo, double hi, const char* name) {
    if (!(lo <= hi)) throw InvalidConfig(std::string(name) + " range is empty");
  };
  range(depth_scale_min, depth_scale_max, "depth_scale");
  range(spatial_scale_min, spatial_scale_max, "spatial_scale");
  if (!(depth_scale_min > 0.0)) throw InvalidConfig("depth_scale_min must be positive");
  if (!(spatial_scale_min >= 1.0) || !(spatial_scale_max <= 2.0)) {
    throw InvalidConfig("spatial_scale range must lie in [1, 2]");
  }
  for (double p : {flip_probability, vertical_flip_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidConfig("flip probabilities must lie in [0, 1]");
  }
  const PhotometricConfig& ph = photometric;
  if (!(ph.noise_sigma >= 0.0) || !(ph.brightness >= 0.0) || !(ph.contrast >= 0.0 && ph.contrast < 1.0) ||
      !(ph.color >= 0.0 && ph.color < 1.0)) {
    throw InvalidConfig("photometric ranges must be non-negative (contrast and color below 1)");
  }
}

AugmentationConfig AugmentationConfig::from_config(const io::KeyValueConfig& config) {
  AugmentationConfig c;
  auto read = [&](const char* key, double& field) {
    if (auto v = config.get_double(key)) field = *v;
  };
  read("depth_scale_min", c.depth_scale_min);
  read("depth_scale_max", c.depth_scale_max);
  read("spatial_scale_min", c.spatial_scale_min);
  read("spatial_scale_max", c.spatial_scale_max);
  read("flip_probability", c.flip_probability);
  read("vertical_flip_probability", c.vertical_flip_probability);
  read("noise_sigma", c.photometric.noise_sigma);
  read("brightness", c.photometric.brightness);
  read("contrast", c.photometric.contrast);
  read("color", c.photometric.color);
  if (auto v = config.get_int("seed")) c.seed = static_cast<std::uint64_t>(*v);
  c.validate();
  return c;
}

AugmentationDraw draw_augmentation(const AugmentationConfig& config, std::uint64_t sample_index) {
  config.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(sample_index),
                    static_cast<std::uint32_t>(sample_index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentationDraw d;
  d.depth_scale = config.depth_scale_min + (config.depth_scale_max - config.depth_scale_min) * unit(rng);
  d.spatial_scale =
      config.spatial_scale_min + (config.spatial_scale_max - config.spatial_scale_min) * unit(rng);
  d.flip_horizontal = unit(rng) < config.flip_probability;
  d.flip_vertical = unit(rng) < config.vertical_flip_probability;
  d.photometric_seed = rng();
  return d;
}

WorldScaled scale_world(std::span<const Frame> frames, const DepthMap& gt, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidFactor("world scale must be positive");
  WorldScaled out;
  out.frames.assign(frames.begin(), frames.end());
  for (Frame& f : out.frames) f.pose = f.pose.scaled_translation(s);
  out.gt = gt;
  for (std::size_t i = 0; i < out.gt.depths.size(); ++i) {
    if (out.gt.validity[i]) out.gt.depths[i] *= s;
  }
  return out;
}

namespace {

void check_triple(const CostVolume& volume, const Image& reference, const DepthMap& gt) {
  if (reference.width() != volume.width || reference.height() != volume.height ||
      gt.width() != volume.width || gt.height() != volume.height) {
    throw ShapeMismatch("cost volume, reference image and ground truth differ in size");
  }
}

// Source index of destination (x, y) after a flip.
struct Mirror {
  FlipAxis axis;
  int w, h;
  std::size_t operator()(int x, int y) const {
    const int sx = axis == FlipAxis::kHorizontal ? w - 1 - x : x;
    const int sy = axis == FlipAxis::kVertical ? h - 1 - y : y;
    return static_cast<std::size_t>(sy) * static_cast<std::size_t>(w) + static_cast<std::size_t>(sx);
  }
};

}  // namespace

AugmentedSample flip_sample(const CostVolume& volume, const Image& reference, const DepthMap& gt,
                            FlipAxis axis) {
  check_triple(volume, reference, gt);
  const int w = volume.width;
  const int h = volume.height;
  const Mirror src{axis, w, h};
  AugmentedSample out{volume, reference, gt};
  const std::size_t plane = volume.plane_size();
  for (std::size_t d = 0; d < volume.depth_count(); ++d) {
    const std::size_t base = d * plane;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t dst = static_cast<std::size_t>(y) * w + x;
        out.volume.costs[base + dst] = volume.costs[base + src(x, y)];
        out.volume.valid_counts[base + dst] = volume.valid_counts[base + src(x, y)];
      }
    }
  }
  for (int c = 0; c < reference.channels(); ++c) {
    const auto in = reference.plane(c);
    auto o = out.reference.plane(c);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) o[static_cast<std::size_t>(y) * w + x] = in[src(x, y)];
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t dst = static_cast<std::size_t>(y) * w + x;
      out.gt.depths[dst] = gt.depths[src(x, y)];
      out.gt.validity[dst] = gt.validity[src(x, y)];
    }
  }
  return out;
}

AugmentedSample spatial_scale_sample(const CostVolume& volume, const Image& reference,
                                     const DepthMap& gt, double factor) {
  if (!(factor >= 1.0 && factor <= 2.0)) {
    throw InvalidFactor("spatial scale factor must lie in [1, 2]");
  }
  check_triple(volume, reference, gt);
  // Border taps use fx = 1 and a + (b - a) is not always b: skip the resample.
  if (factor == 1.0) return {volume, reference, gt};
  const int w = volume.width;
  const int h = volume.height;
  // Destination pixel center maps back through the image center.
  auto source = [&](int x, int y) {
    return Vec2((x + 0.5 - 0.5 * w) / factor + 0.5 * w - 0.5,
                (y + 0.5 - 0.5 * h) / factor + 0.5 * h - 0.5);
  };
  std::vector<kernels::BilinearTap> taps(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 s = source(x, y);
      // Inside by construction for factor >= 1; the tap clamps rounding.
      kernels::bilinear_tap(s.x(), s.y(), w, h, taps[static_cast<std::size_t>(y) * w + x]);
    }
  }

  AugmentedSample out{volume, reference, gt};
  const std::size_t plane = volume.plane_size();
  for (std::size_t d = 0; d < volume.depth_count(); ++d) {
    const double* in = volume.costs.data() + d * plane;
    const std::uint16_t* counts = volume.valid_counts.data() + d * plane;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t dst = static_cast<std::size_t>(y) * w + x;
        const kernels::BilinearTap& t = taps[dst];
        out.volume.costs[d * plane + dst] = kernels::bilinear_sample(in, w, t);
        const int nx = t.fx < 0.5 ? t.x0 : t.x1;
        const int ny = t.fy < 0.5 ? t.y0 : t.y1;
        out.volume.valid_counts[d * plane + dst] = counts[static_cast<std::size_t>(ny) * w + nx];
      }
    }
  }
  for (int c = 0; c < reference.channels(); ++c) {
    const float* in = reference.plane(c).data();
    float* o = out.reference.plane(c).data();
    for (std::size_t i = 0; i < taps.size(); ++i) {
      o[i] = static_cast<float>(kernels::bilinear_sample(in, w, taps[i]));
    }
  }
  // Nearest valid of the four neighbours, by distance to the sample point.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t dst = static_cast<std::size_t>(y) * w + x;
      const kernels::BilinearTap& t = taps[dst];
      const int xs[4] = {t.x0, t.x1, t.x0, t.x1};
      const int ys[4] = {t.y0, t.y0, t.y1, t.y1};
      const double dx[4] = {t.fx, 1.0 - t.fx, t.fx, 1.0 - t.fx};
      const double dy[4] = {t.fy, t.fy, 1.0 - t.fy, 1.0 - t.fy};
      double best = 1e300;
      int pick = -1;
      for (int k = 0; k < 4; ++k) {
        if (!gt.valid(xs[k], ys[k])) continue;
        const double dist = dx[k] * dx[k] + dy[k] * dy[k];
        if (dist < best) {
          best = dist;
          pick = k;
        }
      }
      if (pick >= 0) {
        out.gt.set(x, y, gt.depths(xs[pick], ys[pick]));
      } else {
        out.gt.invalidate(x, y);
      }
    }
  }
  return out;
}

Image photometric_augment(const Image& image, const PhotometricConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double contrast = 1.0 + config.contrast * sym(rng);
  const double brightness = config.brightness * sym(rng);
  double gain[3];
  for (double& g : gain) g = 1.0 + config.color * sym(rng);

  Image out = image;
  for (int c = 0; c < out.channels(); ++c) {
    const double g = gain[std::min(c, 2)];
    for (float& v : out.plane(c)) {
      double x = v;
      if (config.contrast > 0.0) x = (x - 0.5) * contrast + 0.5;
      if (config.brightness > 0.0) x += brightness;
      if (config.color > 0.0) x *= g;
      if (config.noise_sigma > 0.0) x += config.noise_sigma * noise(rng);
      v = static_cast<float>(std::clamp(x, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace mvdepth
