#include "mvdepth/classical_depth.hpp"
#include "mvdepth/synthetic.hpp"
#include "support/scenes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace mvdepth {
namespace {

// 1-pixel-wide volume from explicit per-depth costs; a negative cost marks
// a cell without contributors.
CostVolume column(const std::vector<std::vector<double>>& per_pixel, std::size_t nd,
                  double d_min = 0.5, double d_max = 50.0) {
  CostVolume v;
  v.hypotheses = sample_inverse_depths(d_min, d_max, nd);
  v.width = static_cast<int>(per_pixel.size());
  v.height = 1;
  v.costs.assign(nd * per_pixel.size(), 0.0);
  v.valid_counts.assign(nd * per_pixel.size(), 0);
  for (std::size_t x = 0; x < per_pixel.size(); ++x) {
    for (std::size_t d = 0; d < nd; ++d) {
      const double c = per_pixel[x][d];
      const std::size_t i = v.index(d, static_cast<int>(x), 0);
      v.costs[i] = c < 0 ? 1.0 : c;
      v.valid_counts[i] = c < 0 ? 0 : 1;
    }
  }
  return v;
}

TEST(ArgminDepth, PicksMinimum) {
  const CostVolume v = column({{0.3, 0.1, 0.2, 0.4}}, 4);
  const ArgminResult r = argmin_depth(v);
  EXPECT_EQ(r.indices(0, 0), 1);
  EXPECT_EQ(r.validity(0, 0), 1);
}

TEST(ArgminDepth, TieGoesToSmallerIndex) {
  const CostVolume v = column({{0.2, 0.1, 0.1, 0.1}, {0.0, 0.0, 0.0, 0.0}}, 4);
  const ArgminResult r = argmin_depth(v);
  EXPECT_EQ(r.indices(0, 0), 1);
  EXPECT_EQ(r.indices(1, 0), 0);
}

TEST(ArgminDepth, IgnoresCellsWithoutContributors) {
  const CostVolume v = column({{-1, 0.5, -1, 0.7}, {-1, -1, -1, -1}}, 4);
  const ArgminResult r = argmin_depth(v);
  EXPECT_EQ(r.indices(0, 0), 1);
  EXPECT_EQ(r.indices(1, 0), -1);
  EXPECT_EQ(r.validity(1, 0), 0);
}

TEST(ParabolaOffset, HandExample) {
  EXPECT_DOUBLE_EQ(parabola_offset(3, 1, 2), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(parabola_offset(2, 1, 3), -1.0 / 6.0);
  EXPECT_EQ(parabola_offset(1, 1, 1), 0.0);
  EXPECT_EQ(parabola_offset(0, 1, 0), 0.0);  // concave
  EXPECT_EQ(parabola_offset(100, 0, 0), 0.5);
}

TEST(ParabolaOffset, RecoversVertexOfSampledParabola) {
  for (double vertex : {-0.4, -0.1, 0.0, 0.25, 0.49}) {
    auto f = [&](double t) { return 2.0 * (t - vertex) * (t - vertex) + 0.3; };
    EXPECT_NEAR(parabola_offset(f(-1), f(0), f(1)), vertex, 1e-12);
  }
}

TEST(SubsampleRefine, MovesInverseDepthByOffsetTimesStep) {
  const CostVolume v = column({{0.9, 3, 1, 2, 0.9}}, 5);
  const DepthMap d = extract_depth(v, true);
  const double inv = v.hypotheses.inverse_depth(2) + v.hypotheses.step() / 6.0;
  // index 0 and 4 cost 0.9 < 1: argmin is index 0, a boundary
  EXPECT_DOUBLE_EQ(d.depths(0, 0), 1.0 / v.hypotheses.inverse_depth(0));
  const CostVolume w = column({{4, 3, 1, 2, 4}}, 5);
  EXPECT_NEAR(extract_depth(w, true).depths(0, 0), 1.0 / inv, 1e-12);
}

TEST(SubsampleRefine, KeepsSampleNextToInvalidNeighbor) {
  const CostVolume v = column({{4, -1, 1, 2, 4}}, 5);
  EXPECT_DOUBLE_EQ(extract_depth(v, true).depths(0, 0), v.hypotheses.depth(2));
}

TEST(SubsampleRefine, BoundaryIndicesStayInRange) {
  const CostVolume v = column({{0, 1, 2, 3}, {3, 2, 1, 0}}, 4);
  const DepthMap d = extract_depth(v, true);
  EXPECT_DOUBLE_EQ(d.depths(0, 0), 50.0);
  EXPECT_DOUBLE_EQ(d.depths(1, 0), 0.5);
}

TEST(SubsampleRefine, OutputWithinRange) {
  std::vector<std::vector<double>> px;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> c(16);
    for (int d = 0; d < 16; ++d) c[d] = std::abs(std::sin(0.7 * k + 1.3 * d));
    px.push_back(c);
  }
  const CostVolume v = column(px, 16, 0.5, 50.0);
  const DepthMap d = extract_depth(v, true);
  for (int x = 0; x < d.width(); ++x) {
    ASSERT_TRUE(d.valid(x, 0));
    ASSERT_GE(d.depths(x, 0), 0.5);
    ASSERT_LE(d.depths(x, 0), 50.0);
  }
}

TEST(ExtractDepth, NoRefineReturnsSampledDepth) {
  const CostVolume v = column({{4, 3, 1, 2, 4}, {-1, -1, -1, -1, -1}}, 5);
  const DepthMap d = extract_depth(v, false);
  EXPECT_DOUBLE_EQ(d.depths(0, 0), v.hypotheses.depth(2));
  EXPECT_FALSE(d.valid(1, 0));
  EXPECT_TRUE(std::isnan(d.depths(1, 0)));
}

TEST(ExtractDepth, PositiveAffineCostMapChangesNothing) {
  std::vector<std::vector<double>> px;
  for (int k = 0; k < 40; ++k) {
    std::vector<double> c(12);
    for (int d = 0; d < 12; ++d) c[d] = 0.5 + 0.5 * std::cos(0.37 * k * d + k);
    px.push_back(c);
  }
  const CostVolume v = column(px, 12);
  CostVolume scaled = v;
  for (double& c : scaled.costs) c = 3.0 * c + 0.25;
  const ArgminResult a = argmin_depth(v);
  const ArgminResult b = argmin_depth(scaled);
  EXPECT_EQ(a.indices, b.indices);
  const DepthMap da = extract_depth(v);
  const DepthMap db = extract_depth(scaled);
  for (int x = 0; x < da.width(); ++x) EXPECT_NEAR(da.depths(x, 0), db.depths(x, 0), 1e-9);
}

TEST(ExtractDepth, RenderedPlaneWithinOneBin) {
  const Intrinsics k = testing::centered_intrinsics(64, 48);
  const double depth = 2.0;
  const double px = depth / k.fx;
  auto tex = std::make_shared<const Texture>(make_texture(9, 64, 8));
  const SyntheticScene scene = testing::plane_scene(
      k, depth,
      {Vec3::Zero(), Vec3(7 * px, 0, 0), Vec3(-7 * px, 0, 0), Vec3(0, 6 * px, 0),
       Vec3(0, -6 * px, 0)},
      tex);
  std::vector<Frame> f = testing::render_frames(scene);
  for (std::size_t i = 0; i < f.size(); ++i) f[i].id = std::to_string(i);
  const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, 64);
  const std::vector<Frame> meas(f.begin() + 1, f.end());
  const DepthMap est = extract_depth(build_cost_volume(f[0], meas, h));
  std::size_t good = 0, total = 0;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      ++total;
      if (est.valid(x, y) && std::abs(1.0 / est.depths(x, y) - 1.0 / depth) <= h.step()) ++good;
    }
  }
  EXPECT_GE(static_cast<double>(good) / total, 0.99);
}

}  // namespace
}  // namespace mvdepth
