#include "mvdepth/sequence_mapper.hpp"
#include "mvdepth/synthetic.hpp"
#include "support/scenes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace mvdepth {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Frame frame_at(const Pose& pose, const std::string& id) {
  Frame f;
  f.intrinsics = testing::centered_intrinsics(8, 8);
  f.image = Image(8, 8, 1, 0.5f);
  f.pose = pose;
  f.id = id;
  return f;
}

TEST(ViewAngle, IdenticalRotationsGiveZero) {
  std::mt19937_64 rng(1);
  const Pose p = testing::random_pose(rng);
  EXPECT_NEAR(view_angle_deg(p, p), 0.0, 1e-6);
}

TEST(ViewAngle, RotationAboutCameraXAxis) {
  const Pose a;
  const Pose b(rotation_about(Vec3::UnitX(), 15.0 * kDeg), Vec3::Zero());
  EXPECT_NEAR(view_angle_deg(a, b), 15.0, 1e-9);
  EXPECT_NEAR(view_angle_deg(b, a), 15.0, 1e-9);
}

TEST(ViewAngle, RollIsInvisible) {
  const Pose a;
  const Pose b(rotation_about(Vec3::UnitZ(), 40.0 * kDeg), Vec3(1, 2, 3));
  EXPECT_NEAR(view_angle_deg(a, b), 0.0, 1e-6);
}

TEST(ViewAngle, MeasuredRelativeToBothRotations) {
  // Both cameras pitched by the same base rotation: only the relative 20
  // degrees about y counts.
  std::mt19937_64 rng(4);
  const Mat3 base = testing::random_rotation(rng, 1.0);
  const Pose a(base, Vec3::Zero());
  const Pose b(base * rotation_about(Vec3::UnitY(), 20.0 * kDeg), Vec3::Zero());
  EXPECT_NEAR(view_angle_deg(a, b), 20.0, 1e-9);
}

TEST(ViewAngle, NeverNaN) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = testing::random_pose(rng, 3.2), b = testing::random_pose(rng, 3.2);
    ASSERT_FALSE(std::isnan(view_angle_deg(a, b)));
    ASSERT_FALSE(std::isnan(view_angle_deg(a, a)));
  }
  const Pose flipped(rotation_about(Vec3::UnitX(), std::numbers::pi), Vec3::Zero());
  EXPECT_NEAR(view_angle_deg(Pose(), flipped), 180.0, 1e-6);
}

TEST(Baseline, Examples) {
  EXPECT_EQ(baseline(Pose(), Pose()), 0.0);
  EXPECT_DOUBLE_EQ(baseline(Pose(), Pose(Mat3::Identity(), Vec3(0.3, 0, 0))), 0.3);
  EXPECT_DOUBLE_EQ(baseline(Pose(Mat3::Identity(), Vec3(1, 2, 2)), Pose()), 3.0);
}

std::vector<bool> select_along(const std::vector<Pose>& poses, SelectionThresholds t) {
  KeyframeRing ring(t);
  std::vector<bool> out;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out.push_back(ring.maybe_select(frame_at(poses[i], std::to_string(i))));
  }
  return out;
}

TEST(KeyframeRing, FirstFrameAlwaysSelected) {
  KeyframeRing ring;
  EXPECT_TRUE(ring.should_select(frame_at(Pose(), "a")));
  EXPECT_TRUE(ring.maybe_select(frame_at(Pose(), "a")));
  EXPECT_EQ(ring.size(), 1u);
}

TEST(KeyframeRing, EveryThirdFrameOnTenCentimeterSteps) {
  const auto poses = linear_trajectory(Vec3::Zero(), Vec3(0.1, 0, 0), 13);
  const auto sel = select_along(poses, {});
  for (std::size_t i = 0; i < sel.size(); ++i) EXPECT_EQ(sel[i], i % 3 == 0) << i;
}

TEST(KeyframeRing, EveryThirdFrameInAnyDirection) {
  for (const Vec3& step : {Vec3(-0.1, 0, 0), Vec3(0, 0.1, 0), Vec3(0, 0, -0.1)}) {
    const auto sel = select_along(linear_trajectory(Vec3(0.7, -0.2, 1.1), step, 10), {});
    for (std::size_t i = 0; i < sel.size(); ++i) EXPECT_EQ(sel[i], i % 3 == 0) << i;
  }
}

TEST(KeyframeRing, AngleThresholdAlone) {
  std::vector<Pose> poses;
  for (int i = 0; i < 10; ++i) poses.emplace_back(rotation_about(Vec3::UnitY(), 5.0 * i * kDeg), Vec3::Zero());
  const auto sel = select_along(poses, {});
  for (std::size_t i = 0; i < sel.size(); ++i) EXPECT_EQ(sel[i], i % 3 == 0) << i;
}

TEST(KeyframeRing, ZeroThresholdsSelectEverything) {
  const auto poses = linear_trajectory(Vec3::Zero(), Vec3::Zero(), 6);
  for (bool s : select_along(poses, {0.0, 0.0})) EXPECT_TRUE(s);
}

TEST(KeyframeRing, InfiniteThresholdsSelectOnlyTheFirst) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto poses = linear_trajectory(Vec3::Zero(), Vec3(5, 0, 0), 6);
  const auto sel = select_along(poses, {inf, inf});
  EXPECT_TRUE(sel[0]);
  for (std::size_t i = 1; i < sel.size(); ++i) EXPECT_FALSE(sel[i]);
}

TEST(KeyframeRing, StaticCameraSelectsOnlyTheFirst) {
  const auto sel = select_along(linear_trajectory(Vec3(1, 1, 1), Vec3::Zero(), 8), {});
  EXPECT_EQ(std::count(sel.begin(), sel.end(), true), 1);
}

TEST(KeyframeRing, KeepsLastTwoInOrder) {
  KeyframeRing ring({0.0, 0.0});
  for (int i = 0; i < 5; ++i) ring.maybe_select(frame_at(Pose(), std::to_string(i)));
  ASSERT_EQ(ring.size(), 2u);
  EXPECT_EQ(ring.frames()[0].id, "3");
  EXPECT_EQ(ring.frames()[1].id, "4");
}

// Counts calls and records measurement ids.
class RecordingEstimator : public DepthEstimator {
 public:
  std::vector<std::vector<std::string>> calls;
  std::string name() const override { return "recording"; }
  DepthMap estimate(const Frame& reference, std::span<const Frame> measurements) override {
    std::vector<std::string> ids;
    for (const Frame& m : measurements) {
      EXPECT_NE(m.id, reference.id);
      ids.push_back(m.id);
    }
    calls.push_back(ids);
    return DepthMap(reference.intrinsics.width, reference.intrinsics.height);
  }
};

TEST(SequenceMapper, DefersUntilTwoKeyframes) {
  auto est = std::make_unique<RecordingEstimator>();
  RecordingEstimator* rec = est.get();
  SequenceMapper m(std::move(est));
  const auto poses = linear_trajectory(Vec3::Zero(), Vec3(0.1, 0, 0), 8);
  std::vector<FrameResult> results;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    results.push_back(m.process_frame(frame_at(poses[i], std::to_string(i))));
  }
  // keyframes 0, 3, 6: frames 0..3 have fewer than two keyframes before them
  for (int i = 0; i <= 3; ++i) {
    EXPECT_FALSE(results[i].depth.has_value()) << i;
    EXPECT_TRUE(results[i].measurement_ids.empty());
  }
  for (int i = 4; i < 8; ++i) EXPECT_TRUE(results[i].depth.has_value()) << i;
  EXPECT_EQ(results[4].measurement_ids, (std::vector<std::string>{"0", "3"}));
  EXPECT_EQ(results[7].measurement_ids, (std::vector<std::string>{"3", "6"}));
  EXPECT_TRUE(results[0].selected);
  EXPECT_TRUE(results[6].selected);
  EXPECT_FALSE(results[5].selected);
  EXPECT_EQ(rec->calls.size(), 4u);
}

TEST(SequenceMapper, SyntheticTrajectoryWithinOneBin) {
  const Intrinsics k = testing::centered_intrinsics(320, 256);
  const SyntheticScene scene = testing::plane_scene(
      k, 6.0, {}, std::make_shared<const Texture>(make_texture(1, 256, 8)));
  SyntheticScene s = scene;
  s.trajectory = linear_trajectory(Vec3::Zero(), Vec3(0.1, 0, 0), 20);
  const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, 64);

  auto run = [&] {
    SequenceMapper m(std::make_unique<ClassicalEstimator>(h));
    std::vector<FrameResult> out;
    for (std::size_t i = 0; i < s.trajectory.size(); ++i) {
      out.push_back(m.process_frame(render_scene(s, i).frame));
    }
    return out;
  };
  const std::vector<FrameResult> results = run();
  int with_depth = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].depth) continue;
    ++with_depth;
    const DepthMap gt = render_scene(s, i).depth;
    const DepthMap& d = *results[i].depth;
    std::size_t good = 0;
    for (int y = 0; y < 256; ++y) {
      for (int x = 0; x < 320; ++x) {
        good += d.valid(x, y) && std::abs(1.0 / d.depths(x, y) - 1.0 / gt.depths(x, y)) < h.step();
      }
    }
    EXPECT_GE(static_cast<double>(good) / (320.0 * 256.0), 0.95) << "frame " << i;
  }
  EXPECT_EQ(with_depth, 16);  // frames 4..19

  const std::vector<FrameResult> again = run();
  for (std::size_t i = 0; i < results.size(); ++i) {
    EXPECT_EQ(results[i].selected, again[i].selected);
    EXPECT_EQ(results[i].measurement_ids, again[i].measurement_ids);
    ASSERT_EQ(results[i].depth.has_value(), again[i].depth.has_value());
    if (results[i].depth) {
      EXPECT_TRUE(*results[i].depth == *again[i].depth) << i;
    }
  }
}

}  // namespace
}  // namespace mvdepth
