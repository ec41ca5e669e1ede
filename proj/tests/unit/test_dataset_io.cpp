#include "mvdepth/errors.hpp"
#include "mvdepth/io/config.hpp"
#include "mvdepth/io/image_io.hpp"
#include "mvdepth/io/tum.hpp"
#include "mvdepth/synthetic.hpp"
#include "support/scenes.hpp"
#include "support/tmpdir.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>

namespace mvdepth {
namespace {

using io::TimedPath;
using io::TimedPose;

std::vector<TimedPath> stream(double hz, int count, double offset, const std::string& prefix) {
  std::vector<TimedPath> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({offset + i / hz, prefix + std::to_string(i) + ".png"});
  }
  return out;
}

std::vector<TimedPose> pose_stream(double hz, int count, double offset) {
  std::vector<TimedPose> out;
  for (int i = 0; i < count; ++i) out.push_back({offset + i / hz, Pose(Mat3::Identity(), Vec3(i, 0, 0))});
  return out;
}

std::vector<unsigned char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---- association ----

TEST(Associate, IdenticalTimestamps) {
  const auto idx = io::associate(stream(30, 10, 0, "rgb/"), stream(30, 10, 0, "depth/"),
                                 pose_stream(30, 10, 0));
  ASSERT_EQ(idx.entries.size(), 10u);
  EXPECT_EQ(idx.entries[3].rgb, "rgb/3.png");
  EXPECT_EQ(idx.entries[3].depth, "depth/3.png");
  EXPECT_EQ(idx.entries[3].pose.translation().x(), 3.0);
  EXPECT_EQ(idx.dropped_rgb + idx.dropped_depth + idx.dropped_poses, 0u);
}

TEST(Associate, SmallOffsetsWithinTolerance) {
  const auto idx = io::associate(stream(30, 10, 0, "rgb/"), stream(30, 10, 0.01, "depth/"),
                                 pose_stream(30, 10, -0.01));
  EXPECT_EQ(idx.entries.size(), 10u);
}

TEST(Associate, FastAndSlowStreams) {
  // 30 Hz rgb and poses, 10 Hz depth
  const auto idx = io::associate(stream(30, 30, 0, "rgb/"), stream(10, 10, 0.001, "depth/"),
                                 pose_stream(30, 30, 0));
  ASSERT_EQ(idx.entries.size(), 10u);
  EXPECT_EQ(idx.dropped_rgb, 20u);
  for (std::size_t i = 0; i < idx.entries.size(); ++i) {
    EXPECT_EQ(idx.entries[i].rgb, "rgb/" + std::to_string(3 * i) + ".png");
  }
  for (std::size_t i = 1; i < idx.entries.size(); ++i) {
    EXPECT_GT(idx.entries[i].timestamp, idx.entries[i - 1].timestamp);
  }
}

TEST(Associate, GreedyPrefersClosestPair) {
  // depth at 0.015 is 0.015 from rgb 0.0 but 0.005 from rgb 0.02
  const std::vector<TimedPath> rgb{{0.0, "a"}, {0.02, "b"}};
  const std::vector<TimedPath> depth{{0.015, "d"}};
  const auto idx = io::associate(rgb, depth, pose_stream(100, 3, 0));
  ASSERT_EQ(idx.entries.size(), 1u);
  EXPECT_EQ(idx.entries[0].rgb, "b");
}

TEST(Associate, NoDepthStreamUsesPosesOnly) {
  const auto idx = io::associate(stream(30, 5, 0, "rgb/"), {}, pose_stream(30, 5, 0));
  ASSERT_EQ(idx.entries.size(), 5u);
  EXPECT_TRUE(idx.entries[0].depth.empty());
}

TEST(Associate, NothingMatches) {
  EXPECT_THROW(io::associate(stream(30, 5, 0, "rgb/"), {}, pose_stream(30, 5, 100)), EmptyResult);
}

TEST(ParseLists, FileListSkipsComments) {
  std::istringstream in("# color images\n# timestamp filename\n1.5 rgb/a.png\n\n2.25 rgb/b.png\n");
  const auto list = io::parse_file_list(in);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[1].timestamp, 2.25);
  EXPECT_EQ(list[1].path, "rgb/b.png");
  std::istringstream bad("1.0\n");
  EXPECT_THROW(io::parse_file_list(bad), FormatError);
}

TEST(ParseLists, PoseListQuaternionOrder) {
  const double s = std::sin(std::numbers::pi / 4), c = std::cos(std::numbers::pi / 4);
  std::ostringstream text;
  text.precision(17);
  text << "# ground truth\n0.5 1 2 3 0 0 " << s << " " << c << "\n";
  std::istringstream in(text.str());
  const auto poses = io::parse_pose_list(in);
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_EQ(poses[0].pose.translation(), Vec3(1, 2, 3));
  // 90 degrees about z: x axis goes to y
  EXPECT_NEAR((poses[0].pose.rotation() * Vec3::UnitX() - Vec3::UnitY()).norm(), 0.0, 1e-12);
  std::istringstream zero("0.5 1 2 3 0 0 0 0\n");
  EXPECT_THROW(io::parse_pose_list(zero), InvalidPose);
  std::istringstream bad("0.5 1 2 3 x 0 0 1\n");
  EXPECT_THROW(io::parse_pose_list(bad), FormatError);
}

TEST(ParseLists, PoseListRoundTrip) {
  std::mt19937_64 rng(2);
  std::vector<TimedPose> poses;
  for (int i = 0; i < 5; ++i) poses.push_back({0.1 * i, testing::random_pose(rng, 3.0, 5.0)});
  std::stringstream buf;
  io::write_pose_list(poses, buf);
  const auto back = io::parse_pose_list(buf);
  ASSERT_EQ(back.size(), poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_NEAR((back[i].pose.rotation() - poses[i].pose.rotation()).norm(), 0.0, 1e-12);
    EXPECT_NEAR((back[i].pose.translation() - poses[i].pose.translation()).norm(), 0.0, 1e-12);
  }
}

// ---- depth PNG ----

TEST(DepthPng, RawValuesToMeters) {
  const auto dir = testing::test_dir();
  Grid<std::uint16_t> raw(3, 1);
  raw(0, 0) = 5000;
  raw(1, 0) = 0;
  raw(2, 0) = 65535;
  io::write_png_gray16(raw, dir / "d.png");
  EXPECT_EQ(io::read_png_gray16(dir / "d.png"), raw);
  const DepthMap d = io::load_depth_png(dir / "d.png");
  EXPECT_EQ(d.depths(0, 0), 1.0);
  EXPECT_FALSE(d.valid(1, 0));
  EXPECT_DOUBLE_EQ(d.depths(2, 0), 65535.0 / 5000.0);
  EXPECT_EQ(io::load_depth_png(dir / "d.png", 1000.0).depths(0, 0), 5.0);
}

TEST(DepthPng, RoundTripWithinQuantization) {
  const auto dir = testing::test_dir();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.3, 12.0);
  DepthMap d(31, 17);
  for (int y = 0; y < 17; ++y) {
    for (int x = 0; x < 31; ++x) {
      if ((x * 7 + y) % 5) d.set(x, y, u(rng));
    }
  }
  io::write_depth_png(d, dir / "d.png");
  const DepthMap back = io::load_depth_png(dir / "d.png");
  for (int y = 0; y < 17; ++y) {
    for (int x = 0; x < 31; ++x) {
      ASSERT_EQ(back.valid(x, y), d.valid(x, y));
      if (d.valid(x, y)) {
        ASSERT_LE(std::abs(back.depths(x, y) - d.depths(x, y)), 1.0 / 5000.0);
      }
    }
  }
}

TEST(DepthPng, DecodeAndBitDepthErrors) {
  const auto dir = testing::test_dir();
  { std::ofstream(dir / "junk.png", std::ios::binary) << "this is not a png file at all"; }
  EXPECT_THROW(io::load_depth_png(dir / "junk.png"), DecodeError);
  EXPECT_THROW(io::read_png_rgb(dir / "junk.png"), DecodeError);
  io::write_png_rgb(Image(4, 4, 3, 0.5f), dir / "rgb.png");
  EXPECT_THROW(io::load_depth_png(dir / "rgb.png"), BitDepthError);
  io::write_png_gray16(Grid<std::uint16_t>(4, 4, 1), dir / "g16.png");
  EXPECT_THROW(io::read_png_rgb(dir / "g16.png"), BitDepthError);
  EXPECT_THROW(io::load_depth_png(dir / "missing.png"), IoError);
}

TEST(RgbPng, RoundTripEightBit) {
  const auto dir = testing::test_dir();
  Image img(5, 3, 3);
  for (std::size_t i = 0; i < img.values().size(); ++i) img.values()[i] = (i % 256) / 255.0f;
  io::write_png_rgb(img, dir / "c.png");
  const Image back = io::read_png_rgb(dir / "c.png");
  ASSERT_EQ(back.channels(), 3);
  for (std::size_t i = 0; i < img.values().size(); ++i) {
    ASSERT_NEAR(back.values()[i], img.values()[i], 0.5 / 255.0);
  }
}

// ---- PFM ----

TEST(Pfm, GoldenTwoByTwo) {
  const auto dir = testing::test_dir();
  DepthMap d(2, 2);
  d.set(0, 0, 1.0);
  d.set(1, 0, 2.0);
  d.set(0, 1, 3.0);
  io::write_depth_pfm(d, dir / "g.pfm");
  const std::string header = "Pf\n2 2\n-1.0\n";
  std::vector<unsigned char> expect(header.begin(), header.end());
  // bottom row first: (3, NaN), then (1, 2); little-endian f32
  for (auto b : {0x00, 0x00, 0x40, 0x40, 0x00, 0x00, 0xC0, 0x7F, 0x00, 0x00, 0x80, 0x3F, 0x00,
                 0x00, 0x00, 0x40}) {
    expect.push_back(static_cast<unsigned char>(b));
  }
  EXPECT_EQ(file_bytes(dir / "g.pfm"), expect);
}

TEST(Pfm, RoundTripBitwiseWithNaN) {
  const auto dir = testing::test_dir();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-1e3f, 1e3f);
  Grid<float> g(13, 7);
  for (float& v : g.values()) v = u(rng);
  g(3, 4) = std::numeric_limits<float>::quiet_NaN();
  io::write_pfm(g, dir / "r.pfm");
  const Grid<float> back = io::read_pfm(dir / "r.pfm");
  ASSERT_EQ(back.width(), 13);
  ASSERT_EQ(back.height(), 7);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::isnan(g[i])) {
      ASSERT_TRUE(std::isnan(back[i]));
    } else {
      ASSERT_EQ(back[i], g[i]);
    }
  }
}

TEST(Pfm, DepthRoundTripKeepsValidity) {
  const auto dir = testing::test_dir();
  DepthMap d(4, 3);
  d.set(1, 1, 2.5);
  d.set(3, 2, 0.75);
  io::write_depth_pfm(d, dir / "d.pfm");
  const DepthMap back = io::read_depth_pfm(dir / "d.pfm");
  EXPECT_TRUE(back == d);
  EXPECT_TRUE(io::load_depth_map(dir / "d.pfm") == d);
}

TEST(Pfm, RejectsMalformedFiles) {
  const auto dir = testing::test_dir();
  { std::ofstream(dir / "a.pfm", std::ios::binary) << "PF\n2 2\n-1.0\n"; }
  EXPECT_THROW(io::read_pfm(dir / "a.pfm"), FormatError);
  { std::ofstream(dir / "b.pfm", std::ios::binary) << "Pf\n2 2\n-1.0\nabc"; }
  EXPECT_THROW(io::read_pfm(dir / "b.pfm"), FormatError);
  { std::ofstream(dir / "c.pfm", std::ios::binary) << "Pf\nx y\n-1.0\n"; }
  EXPECT_THROW(io::read_pfm(dir / "c.pfm"), FormatError);
}

// ---- config ----

TEST(KeyValueConfig, SeparatorsCommentsAndOverrides) {
  const auto c = io::KeyValueConfig::parse(
      "# intrinsics\nfx 525\nfy=525.5\ncx: 319.5  # trailing\n\ncy 239.5\nfx 500\n");
  EXPECT_EQ(c.get_double("fx"), 500.0);
  EXPECT_EQ(c.get_double("fy"), 525.5);
  EXPECT_EQ(c.get_double("cx"), 319.5);
  EXPECT_FALSE(c.get("width").has_value());
  EXPECT_THROW(c.require_double("width"), FormatError);
  EXPECT_THROW(io::KeyValueConfig::parse("lonely\n"), FormatError);
  const auto bad = io::KeyValueConfig::parse("fx abc\n");
  EXPECT_THROW(bad.get_double("fx"), FormatError);
}

TEST(KeyValueConfig, IntrinsicsRoundTrip) {
  const auto dir = testing::test_dir();
  const Intrinsics k = testing::centered_intrinsics(320, 256);
  io::write_intrinsics(k, dir / "intrinsics.txt");
  const Intrinsics back = io::load_intrinsics(dir / "intrinsics.txt");
  EXPECT_EQ(back.fx, k.fx);
  EXPECT_EQ(back.cy, k.cy);
  EXPECT_EQ(back.width, 320);
  EXPECT_THROW(io::intrinsics_from_config(io::KeyValueConfig::parse("fx 1\nfy 1\ncx 1\ncy 1\n")),
               FormatError);
  EXPECT_THROW(io::intrinsics_from_config(io::KeyValueConfig::parse(
                   "fx -1\nfy 1\ncx 1\ncy 1\nwidth 4\nheight 4\n")),
               InvalidIntrinsics);
  EXPECT_THROW(io::load_intrinsics(dir / "missing.txt"), IoError);
}

// ---- renderer ----

TEST(RenderScene, FrontoParallelPlaneDepth) {
  const Intrinsics k = testing::centered_intrinsics(40, 30);
  const auto scene = testing::plane_scene(k, 2.0, {Vec3::Zero()},
                                          std::make_shared<const Texture>(make_texture(1, 64, 8)));
  const RenderedFrame r = render_scene(scene, 0);
  EXPECT_EQ(r.depth.count_valid(), 40u * 30u);
  for (double v : r.depth.depths.values()) ASSERT_NEAR(v, 2.0, 1e-12);
  EXPECT_EQ(r.frame.id, "000000");
  EXPECT_THROW(render_scene(scene, 1), InvalidConfig);
}

TEST(RenderScene, TranslatedViewEqualsWarpedIdentityView) {
  const Intrinsics k = testing::centered_intrinsics(48, 40);
  const double depth = 2.0;
  const auto scene = testing::plane_scene(
      k, depth, {Vec3::Zero(), Vec3(0.083, -0.021, 0.0)},
      std::make_shared<const Texture>(make_texture(3, 64, 8)));
  const RenderedFrame a = render_scene(scene, 0);
  const RenderedFrame b = render_scene(scene, 1);
  // reference b, measurement a: pixel of b warped into a at the true depth
  const WarpMatrix w = warp_matrix(k, relative_pose(a.frame.pose, b.frame.pose), depth);
  int checked = 0;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 48; ++x) {
      const auto p = w.apply(Vec2(x, y));
      ASSERT_TRUE(p.has_value());
      const auto s = sample_bilinear(a.frame.image, *p);
      if (!s) continue;
      ++checked;
      for (int c = 0; c < 3; ++c) ASSERT_NEAR((*s)[c], b.frame.image.at(c, x, y), 1e-5);
    }
  }
  EXPECT_GT(checked, 1200);
}

TEST(RenderScene, TiltedPlaneMatchesRayIntersection) {
  const Intrinsics k = testing::centered_intrinsics(40, 30);
  TexturedPlane plane;
  const double a = 0.6;
  plane.axis_u = Vec3(std::cos(a), 0.0, std::sin(a));
  plane.axis_v = Vec3(0.0, std::cos(0.2), -std::sin(0.2));
  plane.origin = Vec3(-3.0, -2.0, 3.0);
  plane.texel_size = 0.05;
  plane.texture = std::make_shared<const Texture>(make_texture(2, 128, 8));
  SyntheticScene scene;
  scene.intrinsics = k;
  scene.planes = {plane};
  std::mt19937_64 rng(7);
  scene.trajectory = {Pose(), Pose(testing::random_rotation(rng, 0.1), Vec3(0.2, 0.1, -0.3))};
  const Vec3 n = plane.normal();
  for (std::size_t f = 0; f < 2; ++f) {
    const RenderedFrame r = render_scene(scene, f);
    const Pose& pose = scene.trajectory[f];
    int valid = 0;
    for (int y = 0; y < 30; ++y) {
      for (int x = 0; x < 40; ++x) {
        // ray in camera coordinates with z = 1, moved into the world
        const Vec3 ray_c((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
        const Vec3 ray_w = pose.rotation() * ray_c;
        const double t = n.dot(plane.origin - pose.translation()) / n.dot(ray_w);
        if (t > 0) {
          ++valid;
          ASSERT_TRUE(r.depth.valid(x, y));
          ASSERT_NEAR(r.depth.depths(x, y), t, 1e-9);
        }
      }
    }
    EXPECT_GT(valid, 1000);
  }
}

TEST(RenderScene, TextureIsBandLimitedAndInRange) {
  const Texture t = make_texture(5, 64, 8);
  ASSERT_EQ(t.values.size(), 3u * 64 * 64);
  for (float v : t.values) {
    ASSERT_GE(v, 0.1f - 1e-6f);
    ASSERT_LE(v, 0.9f + 1e-6f);
  }
  const Texture r = make_repetitive_texture(5, 64, 8);
  for (int v = 0; v < 64; v += 9) {
    for (int u = 0; u < 56; ++u) ASSERT_EQ(r.at(0, u, v), r.at(0, u + 8, v));
  }
}

// ---- TUM layout ----

TEST(TumSequence, WriteLoadRoundTrip) {
  const auto dir = testing::test_dir();
  const Intrinsics k = testing::centered_intrinsics(32, 24);
  SyntheticScene scene = testing::plane_scene(
      k, 1.5, {}, std::make_shared<const Texture>(make_texture(1, 64, 8)));
  scene.trajectory = linear_trajectory(Vec3::Zero(), Vec3(0.05, 0, 0), 4);
  write_tum_sequence(scene, dir);
  const io::SequenceIndex idx = io::load_tum_sequence(dir);
  ASSERT_EQ(idx.entries.size(), 4u);
  EXPECT_EQ(idx.intrinsics.fx, k.fx);
  EXPECT_NEAR(idx.entries[2].pose.translation().x(), 0.1, 1e-12);
  const Frame f = io::load_frame(idx, 2);
  EXPECT_EQ(f.image.width(), 32);
  EXPECT_EQ(f.image.channels(), 3);
  const RenderedFrame truth = render_scene(scene, 2);
  for (std::size_t i = 0; i < f.image.values().size(); ++i) {
    ASSERT_NEAR(f.image.values()[i], truth.frame.image.values()[i], 0.5 / 255.0 + 1e-6);
  }
  const DepthMap gt = io::load_ground_truth(idx, 2);
  for (double v : gt.depths.values()) ASSERT_NEAR(v, 1.5, 1.0 / 5000.0);
}

TEST(TumSequence, MissingFilesAndNoDepth) {
  const auto dir = testing::test_dir();
  EXPECT_THROW(io::load_tum_sequence(dir), IoError);
  const Intrinsics k = testing::centered_intrinsics(16, 8);
  SyntheticScene scene = testing::plane_scene(
      k, 1.0, {}, std::make_shared<const Texture>(make_texture(1, 64, 8)));
  scene.trajectory = linear_trajectory(Vec3::Zero(), Vec3(0.05, 0, 0), 2);
  write_tum_sequence(scene, dir);
  std::filesystem::remove(dir / "depth.txt");
  const io::SequenceIndex idx = io::load_tum_sequence(dir);
  ASSERT_EQ(idx.entries.size(), 2u);
  EXPECT_THROW(io::load_ground_truth(idx, 0), EmptyResult);
}

}  // namespace
}  // namespace mvdepth
