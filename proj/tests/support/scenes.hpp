#pragma once

// Shared fixtures: camera setups, random poses and rendered plane scenes.

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/geometry.hpp"
#include "mvdepth/synthetic.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <vector>

namespace mvdepth::testing {

inline Intrinsics centered_intrinsics(int width, int height, double focal_ratio = 0.8) {
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.fx = k.fy = focal_ratio * width;
  k.cx = 0.5 * (width - 1);
  k.cy = 0.5 * (height - 1);
  return k;
}

inline Mat3 random_rotation(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(-max_angle, max_angle);
  return rotation_about(Vec3(n(rng), n(rng), n(rng)), a(rng));
}

inline Pose random_pose(std::mt19937_64& rng, double max_angle = 0.5, double max_t = 1.0) {
  std::uniform_real_distribution<double> t(-max_t, max_t);
  return Pose(random_rotation(rng, max_angle), Vec3(t(rng), t(rng), t(rng)));
}

inline Intrinsics random_intrinsics(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> f(100.0, 800.0);
  std::uniform_int_distribution<int> size(64, 640);
  Intrinsics k;
  k.width = size(rng);
  k.height = size(rng);
  k.fx = f(rng);
  k.fy = f(rng);
  std::uniform_real_distribution<double> cx(0.3 * k.width, 0.7 * k.width);
  std::uniform_real_distribution<double> cy(0.3 * k.height, 0.7 * k.height);
  k.cx = cx(rng);
  k.cy = cy(rng);
  return k;
}

/// Fronto-parallel textured plane at `depth`, seen from cameras translated
/// to each of `positions` (identity rotation).
inline SyntheticScene plane_scene(const Intrinsics& k, double depth,
                                  const std::vector<Vec3>& positions,
                                  std::shared_ptr<const Texture> texture) {
  SyntheticScene scene;
  scene.intrinsics = k;
  scene.planes = {fronto_parallel_plane(k, depth, std::move(texture))};
  for (const Vec3& p : positions) scene.trajectory.emplace_back(Mat3::Identity(), p);
  return scene;
}

inline std::vector<Frame> render_frames(const SyntheticScene& scene) {
  std::vector<Frame> frames;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    frames.push_back(render_scene(scene, i).frame);
  }
  return frames;
}

}  // namespace mvdepth::testing
