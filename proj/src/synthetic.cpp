#include "mvdepth/synthetic.hpp"

#include "mvdepth/errors.hpp"
#include "mvdepth/io/config.hpp"
#include "mvdepth/io/image_io.hpp"
#include "mvdepth/io/tum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

namespace mvdepth {

float Texture::at(int c, int u, int v) const {
  const int uu = ((u % size) + size) % size;
  const int vv = ((v % size) + size) % size;
  return values[(static_cast<std::size_t>(c) * size + vv) * size + uu];
}

float Texture::sample(int c, double u, double v) const {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const int u0 = static_cast<int>(fu);
  const int v0 = static_cast<int>(fv);
  const double au = u - fu;
  const double av = v - fv;
  const double top = at(c, u0, v0) + (at(c, u0 + 1, v0) - at(c, u0, v0)) * au;
  const double bottom = at(c, u0, v0 + 1) + (at(c, u0 + 1, v0 + 1) - at(c, u0, v0 + 1)) * au;
  return static_cast<float>(top + (bottom - top) * av);
}

namespace {

struct Wave {
  int fu, fv;
  double amplitude, phase;
};

Texture synthesize(int size, const std::vector<std::vector<Wave>>& channels) {
  Texture tex;
  tex.size = size;
  tex.values.assign(static_cast<std::size_t>(3) * size * size, 0.0f);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> raw(static_cast<std::size_t>(size) * size, 0.0);
    // Integer frequencies: each wave is a lookup into one period of samples.
    std::vector<double> table(static_cast<std::size_t>(size));
    for (const Wave& w : channels[static_cast<std::size_t>(c)]) {
      for (int k = 0; k < size; ++k) {
        table[static_cast<std::size_t>(k)] = w.amplitude * std::cos(two_pi * k / size + w.phase);
      }
      const int step_u = ((w.fu % size) + size) % size;
      const int step_v = ((w.fv % size) + size) % size;
      for (int v = 0; v < size; ++v) {
        int k = static_cast<int>((static_cast<long long>(step_v) * v) % size);
        double* row = raw.data() + static_cast<std::size_t>(v) * size;
        for (int u = 0; u < size; ++u) {
          row[u] += table[static_cast<std::size_t>(k)];
          k += step_u;
          if (k >= size) k -= size;
        }
      }
    }
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double range = std::max(*hi - *lo, 1e-12);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      tex.values[static_cast<std::size_t>(c) * raw.size() + i] =
          static_cast<float>(0.1 + 0.8 * (raw[i] - *lo) / range);
    }
  }
  return tex;
}

}  // namespace

Texture make_texture(std::uint64_t seed, int size, int max_frequency) {
  if (size < 2 || max_frequency < 1) throw InvalidConfig("texture size and frequency must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> amp(0.0, 1.0);
  std::vector<std::vector<Wave>> channels(3);
  for (auto& waves : channels) {
    for (int fv = -max_frequency; fv <= max_frequency; ++fv) {
      for (int fu = 0; fu <= max_frequency; ++fu) {
        if (fu == 0 && fv <= 0) continue;  // one of each +/- pair, no DC
        const double radius = std::hypot(fu, fv);
        if (radius > max_frequency) continue;
        // Gentle 1/f falloff keeps both coarse and fine structure.
        waves.push_back({fu, fv, amp(rng) / radius, phase(rng)});
      }
    }
  }
  return synthesize(size, channels);
}

Texture make_repetitive_texture(std::uint64_t seed, int size, int period) {
  if (period < 2 || size % period != 0) {
    throw InvalidConfig("repetitive texture period must divide the texture size");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> amp(0.0, 1.0);
  const int base = size / period;
  std::vector<std::vector<Wave>> channels(3);
  for (auto& waves : channels) {
    for (int harmonic = 1; harmonic <= 2; ++harmonic) {
      for (int fv = -2; fv <= 2; ++fv) {
        waves.push_back({harmonic * base, fv, amp(rng) / harmonic, phase(rng)});
      }
    }
  }
  return synthesize(size, channels);
}

RenderedFrame render_scene(const SyntheticScene& scene, std::size_t index) {
  if (index >= scene.trajectory.size()) throw InvalidConfig("frame index outside trajectory");
  const Intrinsics& k = scene.intrinsics;
  k.validate();
  const Pose& pose = scene.trajectory[index];
  const Mat3& r = pose.rotation();
  const Vec3& c = pose.translation();

  RenderedFrame out;
  out.frame.image = Image(k.width, k.height, 3);
  out.frame.pose = pose;
  out.frame.intrinsics = k;
  char id[32];
  std::snprintf(id, sizeof id, "%06zu", index);
  out.frame.id = id;
  out.depth = DepthMap(k.width, k.height);

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      // Camera ray with unit z, so the ray parameter is the depth.
      const Vec3 ray_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const Vec3 ray = r * ray_cam;
      double best = std::numeric_limits<double>::infinity();
      const TexturedPlane* hit = nullptr;
      for (const TexturedPlane& plane : scene.planes) {
        const Vec3 n = plane.normal();
        const double denom = n.dot(ray);
        if (std::abs(denom) < 1e-12) continue;
        const double s = n.dot(plane.origin - c) / denom;
        if (s > kMinProjectableDepth && s < best) {
          best = s;
          hit = &plane;
        }
      }
      if (!hit) continue;
      const Vec3 rel = c + best * ray - hit->origin;
      const double tu = rel.dot(hit->axis_u) / hit->texel_size;
      const double tv = rel.dot(hit->axis_v) / hit->texel_size;
      for (int ch = 0; ch < 3; ++ch) out.frame.image.at(ch, x, y) = hit->texture->sample(ch, tu, tv);
      out.depth.set(x, y, best);
    }
  }
  return out;
}

TexturedPlane fronto_parallel_plane(const Intrinsics& intrinsics, double depth,
                                    std::shared_ptr<const Texture> texture) {
  if (!(depth > 0.0)) throw NonPositiveDepth("plane depth must be positive");
  TexturedPlane p;
  p.texel_size = depth / intrinsics.fx;
  // Texel (0, 0) sits on the ray through pixel (0, 0).
  p.origin = Vec3(-intrinsics.cx * depth / intrinsics.fx, -intrinsics.cy * depth / intrinsics.fy,
                  depth);
  p.axis_u = Vec3::UnitX();
  p.axis_v = Vec3::UnitY();
  p.texture = std::move(texture);
  return p;
}

std::vector<Pose> linear_trajectory(const Vec3& start, const Vec3& step, std::size_t count) {
  std::vector<Pose> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.emplace_back(Mat3::Identity(), start + static_cast<double>(k) * step);
  }
  return out;
}

void write_tum_sequence(const SyntheticScene& scene, const std::filesystem::path& root,
                        double t0, double dt) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "rgb");
  fs::create_directories(root / "depth");
  std::ofstream rgb_list(root / "rgb.txt");
  std::ofstream depth_list(root / "depth.txt");
  std::ofstream pose_list(root / "groundtruth.txt");
  if (!rgb_list || !depth_list || !pose_list) throw IoError("cannot write into " + root.string());
  rgb_list << "# timestamp filename\n" << std::fixed << std::setprecision(6);
  depth_list << "# timestamp filename\n" << std::fixed << std::setprecision(6);
  std::vector<io::TimedPose> poses;
  for (std::size_t k = 0; k < scene.trajectory.size(); ++k) {
    const RenderedFrame f = render_scene(scene, k);
    const double t = t0 + static_cast<double>(k) * dt;
    const std::string rgb = "rgb/" + f.frame.id + ".png";
    const std::string depth = "depth/" + f.frame.id + ".png";
    io::write_png_rgb(f.frame.image, root / rgb);
    io::write_depth_png(f.depth, root / depth);
    rgb_list << t << ' ' << rgb << '\n';
    depth_list << t << ' ' << depth << '\n';
    poses.push_back({t, f.frame.pose});
  }
  io::write_pose_list(poses, pose_list);
  io::write_intrinsics(scene.intrinsics, root / "intrinsics.txt");
}

}  // namespace mvdepth
