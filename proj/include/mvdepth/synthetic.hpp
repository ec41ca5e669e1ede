#pragma once

// Ray-cast renderer for scenes made of textured planes. Every rendered pixel
// has an exact analytic depth, which makes it the ground-truth source for
// the cost-volume, extraction and sequence tests.

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/geometry.hpp"
#include "mvdepth/image.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

namespace mvdepth {

/// Periodic 3-channel texture, size x size texels.
struct Texture {
  int size = 0;
  std::vector<float> values;  // planar, channel-major

  float at(int c, int u, int v) const;
  /// Bilinear lookup with periodic wrap; coordinates in texels.
  float sample(int c, double u, double v) const;
};

/// Sum of random-phase cosines with integer frequencies up to
/// `max_frequency` cycles per period, rescaled into [0.1, 0.9]. Band-limited,
/// so bilinear resampling stays accurate.
Texture make_texture(std::uint64_t seed, int size = 256, int max_frequency = 24);

/// Texture that repeats every `period` texels along u and is band-limited
/// along v: the one-view matching ambiguity case.
Texture make_repetitive_texture(std::uint64_t seed, int size, int period);

struct TexturedPlane {
  Vec3 origin;  // world point at texture coordinate (0, 0)
  Vec3 axis_u;  // unit in-plane directions
  Vec3 axis_v;
  double texel_size = 0.01;  // meters per texel
  std::shared_ptr<const Texture> texture;

  Vec3 normal() const { return axis_u.cross(axis_v).normalized(); }
};

struct SyntheticScene {
  std::vector<TexturedPlane> planes;
  std::vector<Pose> trajectory;  // world_from_camera per frame
  Intrinsics intrinsics;
};

struct RenderedFrame {
  Frame frame;  // raw intensities in [0, 1]; id is the zero-padded index
  DepthMap depth;
};

/// Nearest positive ray-plane hit per pixel center. Pixels that hit nothing
/// are black and invalid in the depth map. Throws InvalidConfig on a bad
/// index.
RenderedFrame render_scene(const SyntheticScene& scene, std::size_t index);

/// Plane z = depth in the world frame, facing the camera at the identity
/// pose. With fx == fy there is one texel per pixel at that pose and texel
/// centers lie on pixel centers.
TexturedPlane fronto_parallel_plane(const Intrinsics& intrinsics, double depth,
                                    std::shared_ptr<const Texture> texture);

/// Poses start + k * step (k = 0..count-1) with identity rotation.
std::vector<Pose> linear_trajectory(const Vec3& start, const Vec3& step, std::size_t count);

/// Writes rgb/, depth/ (16-bit PNG, scale 5000), rgb.txt, depth.txt,
/// groundtruth.txt and intrinsics.txt. Frame k gets timestamp t0 + k * dt.
void write_tum_sequence(const SyntheticScene& scene, const std::filesystem::path& root,
                        double t0 = 0.0, double dt = 1.0 / 30.0);

}  // namespace mvdepth
