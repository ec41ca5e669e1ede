// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a
// single criterion; the exit status is 0 when every selected line passes.
// Criterion 13 returns 77 (ctest skip) when fewer than 4 cores are present
// and the single-worker part passed, since the speedup cannot be measured.

#include "mvdepth/augmentation.hpp"
#include "mvdepth/classical_depth.hpp"
#include "mvdepth/cost_volume.hpp"
#include "mvdepth/depthnet/gradcheck.hpp"
#include "mvdepth/depthnet/network.hpp"
#include "mvdepth/depthnet/train.hpp"
#include "mvdepth/geometry.hpp"
#include "mvdepth/metrics.hpp"
#include "mvdepth/sequence_mapper.hpp"
#include "mvdepth/synthetic.hpp"
#include "mvdepth/toy_data.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace mvdepth {
namespace {

// Tolerances.
constexpr double kWarpTolPx = 1e-9;
constexpr double kWarpMaxSeconds = 1.0;
constexpr double kIdentityCostTol = 1e-12;
constexpr double kPlaneWithinBinFrac = 0.99;
constexpr double kPlaneMedianBins = 0.5;
constexpr double kTrendSlack = 0.05;
constexpr double kAmbiguityFrac = 0.80;
constexpr double kNearMinimumFrac = 0.05;
constexpr double kParamTarget = 33.9e6;
constexpr double kParamRelTol = 0.02;
constexpr double kGradMaxSeconds = 120.0;
constexpr double kOverfitTarget = 0.05;
constexpr int kOverfitIterations = 2000;
constexpr int kOverfitWindow = 20;
constexpr double kOverfitFinalRatio = 0.25;
constexpr double kWorldScaleTol = 1e-9;
constexpr double kVolumeMaxSeconds = 5.0;
constexpr double kMinSpeedup = 2.0;
constexpr int kSpeedupWorkers = 4;

constexpr int kSkip = 77;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skip = false;  // only consulted by ctest
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Intrinsics camera(int w, int h, double focal_ratio = 0.8) {
  Intrinsics k;
  k.width = w;
  k.height = h;
  k.fx = k.fy = focal_ratio * w;
  k.cx = 0.5 * (w - 1);
  k.cy = 0.5 * (h - 1);
  return k;
}

// Plane through (0, 0, depth) rotated by `tilt_deg` about the camera y axis.
TexturedPlane tilted_plane(const Intrinsics& k, double depth, double tilt_deg,
                           std::shared_ptr<const Texture> tex) {
  const double a = tilt_deg * std::numbers::pi / 180.0;
  TexturedPlane p;
  p.axis_u = Vec3(std::cos(a), 0.0, std::sin(a));
  p.axis_v = Vec3(0.0, 1.0, 0.0);
  p.texel_size = depth / k.fx;
  p.origin = Vec3(0, 0, depth) - 0.5 * tex->size * p.texel_size * (p.axis_u + p.axis_v);
  p.texture = std::move(tex);
  return p;
}

struct Rendered {
  std::vector<Frame> frames;
  DepthMap gt;  // of frame 0
};

Rendered render_all(const SyntheticScene& scene) {
  Rendered r;
  for (std::size_t i = 0; i < scene.trajectory.size(); ++i) {
    RenderedFrame f = render_scene(scene, i);
    if (i == 0) r.gt = f.depth;
    r.frames.push_back(std::move(f.frame));
  }
  return r;
}

std::vector<Frame> tail(const std::vector<Frame>& f) { return {f.begin() + 1, f.end()}; }

// 1. Warp matrix against the explicit back-project / transform / project
// chain, written out with plain arithmetic.
Outcome warp_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int done = 0;
  while (done < 1000) {
    Intrinsics k;
    k.width = 64 + static_cast<int>(unit(rng) * 576);
    k.height = 64 + static_cast<int>(unit(rng) * 576);
    k.fx = 100 + 700 * unit(rng);
    k.fy = 100 + 700 * unit(rng);
    k.cx = k.width * (0.3 + 0.4 * unit(rng));
    k.cy = k.height * (0.3 + 0.4 * unit(rng));
    const Vec3 axis(normal(rng), normal(rng), normal(rng));
    const Mat3 r = rotation_about(axis, 0.5 * (2 * unit(rng) - 1));
    const Vec3 t(2 * unit(rng) - 1, 2 * unit(rng) - 1, 2 * unit(rng) - 1);
    const double depth = 0.5 + 49.5 * unit(rng);
    const double u = unit(rng) * k.width, v = unit(rng) * k.height;

    const double x = (u - k.cx) / k.fx * depth, y = (v - k.cy) / k.fy * depth;
    const double xm = r(0, 0) * x + r(0, 1) * y + r(0, 2) * depth + t.x();
    const double ym = r(1, 0) * x + r(1, 1) * y + r(1, 2) * depth + t.y();
    const double zm = r(2, 0) * x + r(2, 1) * y + r(2, 2) * depth + t.z();
    if (zm < 0.1) continue;  // behind or grazing the measurement camera
    const double pu = k.fx * xm / zm + k.cx, pv = k.fy * ym / zm + k.cy;

    const auto got = warp_matrix(k, Pose(r, t), depth).apply(Vec2(u, v));
    if (!got) return {false, fmt("warp rejected a point in front (z = %.3f)", zm)};
    worst = std::max({worst, std::abs(got->x() - pu), std::abs(got->y() - pv)});
    ++done;
  }
  const double s = seconds_since(t0);
  return {worst < kWarpTolPx && s < kWarpMaxSeconds,
          fmt("1000 tuples, max |dev| %.3g px (< %g), %.3f s (< %g s)", worst, kWarpTolPx, s,
              kWarpMaxSeconds)};
}

// 2. Identity pose, measurement = reference.
Outcome zero_cost_identity() {
  const Intrinsics k = camera(320, 256);
  SyntheticScene scene;
  scene.intrinsics = k;
  scene.planes = {tilted_plane(k, 3.0, 20.0, std::make_shared<const Texture>(make_texture(5)))};
  scene.trajectory = {Pose()};
  Frame ref = render_scene(scene, 0).frame;
  Frame meas = ref;
  meas.id = "copy";
  const CostVolume v =
      build_cost_volume(ref, std::span(&meas, 1), sample_inverse_depths(0.5, 50.0, 64));
  double worst = 0.0;
  for (double c : v.costs) worst = std::max(worst, std::abs(c));
  return {worst < kIdentityCostTol && v.costs.size() == 64u * 320u * 256u,
          fmt("320x256x64, max cost %.3g (< %g)", worst, kIdentityCostTol)};
}

// 3. Noiseless tilted plane, two measurements 0.1 m to either side.
Outcome plane_recovery() {
  const Intrinsics k = camera(320, 256);
  SyntheticScene scene;
  scene.intrinsics = k;
  scene.planes = {tilted_plane(k, 2.7, 15.0, std::make_shared<const Texture>(make_texture(11, 256, 8)))};
  scene.trajectory = {Pose(), Pose(Mat3::Identity(), Vec3(0.1, 0, 0)),
                      Pose(Mat3::Identity(), Vec3(-0.1, 0, 0))};
  const Rendered r = render_all(scene);
  const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, 64);
  const CostVolume v = build_cost_volume(r.frames[0], tail(r.frames), h);
  const ArgminResult am = argmin_depth(v);
  const DepthMap refined = subsample_refine(v, am);

  std::size_t valid = 0, within = 0;
  std::vector<double> err;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (!r.gt.valid(x, y) || !am.validity(x, y)) continue;
      ++valid;
      const double g = 1.0 / r.gt.depths(x, y);
      within += std::abs(h.inverse_depth(am.indices(x, y)) - g) <= h.step();
      err.push_back(refined.valid(x, y) ? std::abs(1.0 / refined.depths(x, y) - g)
                                        : std::numeric_limits<double>::infinity());
    }
  }
  if (valid == 0) return {false, "no valid pixels"};
  std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
  const double median_bins = err[err.size() / 2] / h.step();
  const double frac = static_cast<double>(within) / valid;
  return {frac >= kPlaneWithinBinFrac && median_bins < kPlaneMedianBins,
          fmt("argmin within one bin on %.2f%% of %zu px (>= %g%%), refined median %.3f bins (< %g)",
              100 * frac, valid, 100 * kPlaneWithinBinFrac, median_bins, kPlaneMedianBins)};
}

// 4. Classical L1-inv over a fixed set of tilted planes for N_d = 16, 32, 64.
Outcome depth_count_trend() {
  const Intrinsics k = camera(160, 128);
  struct Case {
    double depth, tilt;
    Vec3 b1, b2;
  };
  const std::vector<Case> cases = {{1.5, -20, {0.15, 0, 0}, {0, 0.1, 0}},
                                   {2.5, 10, {-0.2, 0, 0}, {0.1, -0.1, 0}},
                                   {4.0, 30, {0.25, 0.05, 0}, {-0.15, 0, 0}},
                                   {1.1, -35, {0.08, 0, 0}, {0, -0.08, 0}}};
  std::vector<Rendered> set;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    SyntheticScene s;
    s.intrinsics = k;
    s.planes = {tilted_plane(k, cases[i].depth, cases[i].tilt,
                             std::make_shared<const Texture>(make_texture(100 + i, 256, 8)))};
    s.trajectory = {Pose(), Pose(Mat3::Identity(), cases[i].b1), Pose(Mat3::Identity(), cases[i].b2)};
    set.push_back(render_all(s));
  }
  std::vector<double> l1;
  for (std::size_t nd : {16, 32, 64}) {
    MetricsAccumulator acc;
    const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, nd);
    for (const Rendered& r : set) {
      acc.add(extract_depth(build_cost_volume(r.frames[0], tail(r.frames), h)), r.gt);
    }
    l1.push_back(acc.report().l1_inv);
  }
  const bool ok = l1[1] <= (1 + kTrendSlack) * l1[0] && l1[2] <= (1 + kTrendSlack) * l1[1];
  return {ok, fmt("L1-inv N_d=16: %.5f, 32: %.5f, 64: %.5f (non-increasing, %g%% slack)", l1[0],
                  l1[1], l1[2], 100 * kTrendSlack)};
}

// Local minima along depth within 5% of the pixel's cost range above its
// minimum.
int near_minima(const CostVolume& v, int x, int y) {
  const std::size_t n = v.depth_count();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t d = 0; d < n; ++d) {
    lo = std::min(lo, v.cost(d, x, y));
    hi = std::max(hi, v.cost(d, x, y));
  }
  int count = 0;
  for (std::size_t d = 0; d < n; ++d) {
    const double c = v.cost(d, x, y);
    const bool left = d == 0 || c <= v.cost(d - 1, x, y);
    const bool right = d + 1 == n || c <= v.cost(d + 1, x, y);
    count += left && right && c <= lo + kNearMinimumFrac * (hi - lo);
  }
  return count;
}

bool fully_observed(const CostVolume& v, int x, int y, std::uint16_t views) {
  for (std::size_t d = 0; d < v.depth_count(); ++d) {
    if (v.count(d, x, y) != views) return false;
  }
  return true;
}

// 5. Repetitive texture: ambiguity with one versus three measurements.
Outcome multi_frame_benefit() {
  const Intrinsics k = camera(160, 128);
  SyntheticScene s;
  s.intrinsics = k;
  s.planes = {fronto_parallel_plane(k, 2.0, std::make_shared<const Texture>(make_repetitive_texture(3, 64, 16)))};
  s.trajectory = {Pose(), Pose(Mat3::Identity(), Vec3(0.25, 0, 0)),
                  Pose(Mat3::Identity(), Vec3(0, 0.15, 0)), Pose(Mat3::Identity(), Vec3(0.1, 0.08, 0))};
  const Rendered r = render_all(s);
  const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, 64);
  const CostVolume one = build_cost_volume(r.frames[0], std::span(&r.frames[1], 1), h);
  const CostVolume three = build_cost_volume(r.frames[0], tail(r.frames), h);
  std::size_t eligible = 0, better = 0;
  long sum_one = 0, sum_three = 0;
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (!fully_observed(one, x, y, 1) || !fully_observed(three, x, y, 3)) continue;
      ++eligible;
      const int a = near_minima(one, x, y), b = near_minima(three, x, y);
      sum_one += a;
      sum_three += b;
      better += b < a;
    }
  }
  if (eligible == 0) return {false, "no pixel seen by all views"};
  const double frac = static_cast<double>(better) / eligible;
  return {frac >= kAmbiguityFrac,
          fmt("fewer near-minima at %.2f%% of %zu fully observed px (>= %g%%); mean %.2f -> %.2f",
              100 * frac, eligible, 100 * kAmbiguityFrac, static_cast<double>(sum_one) / eligible,
              static_cast<double>(sum_three) / eligible)};
}

// 6. Full-width network layout.
Outcome network_conformance() {
  using namespace depthnet;
  NetworkConfig cfg;
  cfg.sigmoid_scale = 1.0 / 0.5;
  const NetworkGraph<float> net(cfg);
  const double params = static_cast<double>(net.parameter_count());
  const double rel = std::abs(params - kParamTarget) / kParamTarget;
  const auto shapes = net.output_shapes(256, 320);
  const int expect[4][2] = {{320, 256}, {160, 128}, {80, 64}, {40, 32}};
  bool sizes = true;
  std::ostringstream res;
  for (int s = 0; s < 4; ++s) {
    sizes = sizes && shapes[s].w == expect[s][0] && shapes[s].h == expect[s][1] && shapes[s].c == 1;
    res << (s ? ", " : "") << shapes[s].w << "x" << shapes[s].h;
  }
  const int in = net.layer("conv1").in_channels;
  return {rel <= kParamRelTol && sizes && in == 67,
          fmt("%zu params (%.2f%% off 33.9M, <= %g%%), outputs %s, conv1 in %d (= 67)",
              net.parameter_count(), 100 * rel, 100 * kParamRelTol, res.str().c_str(), in)};
}

// 7. Double-precision finite differences on the 1/8-width network.
Outcome gradient_check() {
  depthnet::GradCheckConfig cfg;  // 32x32, 1/8 width, 20 entries, step 1e-5
  const auto t0 = Clock::now();
  const depthnet::GradCheckReport rep = depthnet::gradient_check(cfg);
  const double s = seconds_since(t0);
  const bool ok = rep.entries.size() == 20 && rep.max_relative_error < depthnet::kGradCheckTolerance &&
                  s < kGradMaxSeconds;
  return {ok, fmt("%zu entries, max rel err %.3g (< %g), %d kinks redrawn, %.1f s (< %g s)",
                  rep.entries.size(), rep.max_relative_error, depthnet::kGradCheckTolerance,
                  rep.kinks_skipped, s, kGradMaxSeconds)};
}

// 8. Toy network overfits 8 pairs.
Outcome overfit() {
  ToyDataConfig dc;  // 8 pairs, 64x48, N_d 64
  const ToyDataset data = make_toy_dataset(dc);
  depthnet::NetworkConfig nc;
  nc.n_depth_samples = dc.n_depth_samples;
  nc.channel_width_scale = {1, 8};
  nc.sigmoid_scale = 1.0 / dc.d_min;
  depthnet::NetworkGraph<float> net(nc);
  net.initialize(1);
  depthnet::TrainConfig tc;
  tc.iterations = kOverfitIterations;
  tc.batch_size = 8;
  tc.learning_rate = 1e-4;
  tc.target_l1_inv = kOverfitTarget;
  tc.seed = 1;
  const auto t0 = Clock::now();
  const depthnet::TrainingLog log = depthnet::train_toy(net, data.samples, tc);
  const double s = seconds_since(t0);

  const auto& rec = log.records;
  std::vector<double> means;
  for (std::size_t i = 0; i + kOverfitWindow <= rec.size(); i += kOverfitWindow) {
    double m = 0;
    for (int j = 0; j < kOverfitWindow; ++j) m += rec[i + j].loss;
    means.push_back(m / kOverfitWindow);
  }
  bool monotone = means.size() >= 2;
  for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] < means[i - 1];
  const double first = rec.front().loss, last = rec.back().loss;
  const bool ok = log.reached_target && monotone && last < kOverfitFinalRatio * first;
  return {ok, fmt("L1-inv %.4f at iteration %d (< %g within %d), loss %.3f -> %.3f (< %g%%), "
                  "%zu window means of %d %s, %.0f s",
                  rec.back().l1_inv, rec.back().iteration, kOverfitTarget, kOverfitIterations, first,
                  last, 100 * kOverfitFinalRatio, means.size(), kOverfitWindow,
                  monotone ? "strictly decreasing" : "NOT decreasing", s)};
}

// 9. Hand fixture: pred = 2 gt, gt = 1 m.
Outcome metrics_exactness() {
  DepthMap gt(16, 12), pred(16, 12);
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 16; ++x) {
      gt.set(x, y, 1.0);
      pred.set(x, y, 2.0);
    }
  }
  const MetricsReport r = evaluate(pred, gt);
  const bool ok = r.l1_rel == 1.0 && r.l1_inv == 0.5 && r.sc_inv == 0.0 && r.cp_pct == 0.0;
  return {ok, fmt("L1-rel %.17g, L1-inv %.17g, sc-inv %.17g, C.P. %.17g (exact 1, 0.5, 0, 0)",
                  r.l1_rel, r.l1_inv, r.sc_inv, r.cp_pct)};
}

bool within_one_ulp(double a, double b) {
  return a == b || std::nextafter(a, b) == b;
}

// 10. Inverse-depth endpoints.
Outcome sampling_endpoints() {
  struct Range {
    double lo, hi;
    std::size_t n;
  };
  const std::vector<Range> ranges = {{0.5, 50.0, 64}, {0.5, 50.0, 16}, {0.1, 10.0, 32},
                                     {0.3, 7.0, 100}, {1.0 / 3.0, 1e3, 2}};
  for (const Range& r : ranges) {
    const DepthHypotheses h = sample_inverse_depths(r.lo, r.hi, r.n);
    if (!within_one_ulp(h.inverse_depth(0), 1.0 / r.hi) ||
        !within_one_ulp(h.inverse_depth(r.n - 1), 1.0 / r.lo)) {
      return {false, fmt("[%g, %g] N_d=%zu: endpoints %.17g, %.17g", r.lo, r.hi, r.n,
                         h.inverse_depth(0), h.inverse_depth(r.n - 1))};
    }
  }
  return {true, fmt("%zu ranges, first and last samples within 1 ULP of 1/d_max and 1/d_min",
                    ranges.size())};
}

// 11. Flips and world scaling.
Outcome augmentation_consistency() {
  const Intrinsics k = camera(96, 64);
  SyntheticScene s;
  s.intrinsics = k;
  s.planes = {tilted_plane(k, 2.0, 25.0, std::make_shared<const Texture>(make_texture(4, 256, 16)))};
  s.trajectory = {Pose(), Pose(Mat3::Identity(), Vec3(0.12, 0, 0)),
                  Pose(rotation_about(Vec3::UnitY(), 0.05), Vec3(-0.1, 0.04, 0.02))};
  const Rendered r = render_all(s);
  const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, 32);
  const CostVolume v = build_cost_volume(r.frames[0], tail(r.frames), h);
  const Image& img = r.frames[0].image;

  bool involution = true, commutes = true;
  for (FlipAxis axis : {FlipAxis::kHorizontal, FlipAxis::kVertical}) {
    const AugmentedSample once = flip_sample(v, img, r.gt, axis);
    const AugmentedSample twice = flip_sample(once.volume, once.reference, once.gt, axis);
    involution = involution && twice.volume == v && twice.reference == img && twice.gt == r.gt;
    const DepthMap extracted = extract_depth(v);
    const DepthMap flipped_after = flip_sample(v, img, extracted, axis).gt;
    commutes = commutes && extract_depth(once.volume) == flipped_after;
  }

  double worst = 0.0;
  for (double f : {0.5, 1.7, 3.0}) {
    const WorldScaled w = scale_world(r.frames, r.gt, f);
    const CostVolume sv = build_cost_volume(w.frames[0], tail(w.frames), h.scaled(f));
    for (std::size_t i = 0; i < v.costs.size(); ++i) {
      if (sv.valid_counts[i] != v.valid_counts[i]) worst = std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::abs(sv.costs[i] - v.costs[i]));
    }
  }
  return {involution && commutes && worst < kWorldScaleTol,
          fmt("flip involution bitwise: %s, flip/extract commute: %s, world scale max dev %.3g "
              "(< %g)",
              involution ? "yes" : "no", commutes ? "yes" : "no", worst, kWorldScaleTol)};
}

// 12. Keyframes on the 0.1 m trajectory and replay.
Outcome sequence_determinism() {
  const auto poses = linear_trajectory(Vec3::Zero(), Vec3(0.1, 0, 0), 16);
  KeyframeRing ring(SelectionThresholds{15.0, 0.3});
  bool every_third = true;
  std::string picked;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    Frame f;
    f.intrinsics = camera(8, 8);
    f.image = Image(8, 8, 1, 0.5f);
    f.pose = poses[i];
    f.id = std::to_string(i);
    const bool sel = ring.maybe_select(f);
    every_third = every_third && sel == (i % 3 == 0);
    if (sel) picked += (picked.empty() ? "" : ",") + f.id;
  }

  const Intrinsics k = camera(160, 128);
  SyntheticScene s;
  s.intrinsics = k;
  s.planes = {tilted_plane(k, 4.0, 10.0, std::make_shared<const Texture>(make_texture(1, 256, 8)))};
  s.trajectory = linear_trajectory(Vec3::Zero(), Vec3(0.1, 0, 0), 13);
  const Rendered r = render_all(s);
  auto run = [&] {
    SequenceMapper m(std::make_unique<ClassicalEstimator>(sample_inverse_depths(0.5, 50.0, 64)),
                     SelectionThresholds{15.0, 0.3});
    std::vector<FrameResult> out;
    for (const Frame& f : r.frames) out.push_back(m.process_frame(f));
    return out;
  };
  const auto a = run(), b = run();
  bool identical = a.size() == b.size();
  int depths = 0;
  for (std::size_t i = 0; identical && i < a.size(); ++i) {
    identical = a[i].selected == b[i].selected && a[i].measurement_ids == b[i].measurement_ids &&
                a[i].depth.has_value() == b[i].depth.has_value() &&
                (!a[i].depth || *a[i].depth == *b[i].depth);
    depths += a[i].depth.has_value();
    every_third = every_third && a[i].selected == (i % 3 == 0);
  }
  return {every_third && identical && depths > 0,
          fmt("selected frames %s of 16, rendered run matches, replay of %d depth maps identical: %s",
              picked.c_str(), depths, identical ? "yes" : "no")};
}

// 13. Volume build time and worker scaling.
Outcome performance() {
  const Intrinsics k = camera(320, 256);
  SyntheticScene s;
  s.intrinsics = k;
  s.planes = {tilted_plane(k, 3.0, 15.0, std::make_shared<const Texture>(make_texture(2)))};
  s.trajectory = {Pose(), Pose(Mat3::Identity(), Vec3(0.1, 0, 0)),
                  Pose(Mat3::Identity(), Vec3(0, 0.1, 0))};
  const Rendered r = render_all(s);
  const DepthHypotheses h = sample_inverse_depths(0.5, 50.0, 64);
  const std::vector<Frame> meas = tail(r.frames);
  auto best_of = [&](int workers) {
    double best = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      const CostVolume v = build_cost_volume(r.frames[0], meas, h, workers);
      best = std::min(best, seconds_since(t0));
      if (v.costs.empty()) return 0.0;
    }
    return best;
  };
  const double t1 = best_of(1);
  const double t4 = best_of(kSpeedupWorkers);
  const double speedup = t1 / t4;
  const unsigned cores = std::thread::hardware_concurrency();
  const bool fast = t1 < kVolumeMaxSeconds;
  Outcome o{fast && speedup >= kMinSpeedup,
            fmt("1 worker %.3f s (< %g s), %d workers %.3f s, speedup %.2fx (>= %g), %u cores", t1,
                kVolumeMaxSeconds, kSpeedupWorkers, t4, speedup, kMinSpeedup, cores)};
  if (!o.pass && fast && cores < static_cast<unsigned>(kSpeedupWorkers)) {
    o.detail += "; speedup not measurable on this machine";
    o.skip = true;
  }
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace mvdepth

int main(int argc, char** argv) {
  using namespace mvdepth;
  CLI::App app{"Acceptance criteria, one line each"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion (1-13)")->check(CLI::Range(1, 13));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {"warp oracle", warp_oracle},
      {"zero-cost identity", zero_cost_identity},
      {"synthetic plane recovery", plane_recovery},
      {"N_d trend", depth_count_trend},
      {"multi-frame benefit", multi_frame_benefit},
      {"network layout", network_conformance},
      {"gradient check", gradient_check},
      {"overfit", overfit},
      {"metrics exactness", metrics_exactness},
      {"sampling endpoints", sampling_endpoints},
      {"augmentation consistency", augmentation_consistency},
      {"sequence selection and replay", sequence_determinism},
      {"performance floor", performance},
  };

  bool ok = true, skip = false;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %2zu  %-30s %s\n", o.pass ? "PASS" : "FAIL", i + 1, all[i].name,
                o.detail.c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
    skip = skip || o.skip;
  }
  if (ok) return 0;
  return only != 0 && skip ? kSkip : 1;
}
