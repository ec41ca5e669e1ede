#include "mvdepth/depthnet/gradcheck.hpp"

#include "mvdepth/depthnet/loss.hpp"
#include "mvdepth/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mvdepth::depthnet {

double gradient_relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-9) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport gradient_check(const GradCheckConfig& config) {
  if (config.parameters < 1) throw InvalidConfig("gradcheck needs at least one parameter");
  if (!(config.step > 0.0)) throw InvalidConfig("gradcheck step must be positive");
  NetworkConfig net_config;
  net_config.n_depth_samples = config.n_depth_samples;
  net_config.channel_width_scale = config.channel_width_scale;
  net_config.sigmoid_scale = 2.0;
  NetworkGraph<double> net(net_config);
  net.initialize(config.seed);

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> depth(0.6, 4.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Tensor<double> x(config.batch, config.n_depth_samples + 3, config.height, config.width);
  for (double& v : x.values()) v = normal(rng);
  std::vector<GtPyramid> gt;
  for (int b = 0; b < config.batch; ++b) {
    DepthMap map(config.width, config.height);
    for (int y = 0; y < config.height; ++y) {
      for (int xx = 0; xx < config.width; ++xx) {
        if (unit(rng) < 0.9) map.set(xx, y, depth(rng));
      }
    }
    gt.push_back(gt_pyramid(map));
  }
  const std::span<const GtPyramid> gt_span(gt);
  const ForwardMode mode{true, false};

  // Loss plus the sign pattern of every non-smooth point it passes through
  // (ReLU inputs and L1 residuals).
  auto evaluate = [&](std::vector<std::uint8_t>& signs) {
    ForwardRecord<double> rec;
    const Prediction<double> pred = net.forward(x, mode, &rec);
    signs.clear();
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
      if (!net.layers()[i].has_relu) continue;
      for (double v : rec.outputs[i].values()) signs.push_back(v > 0.0);
    }
    for (std::size_t s = 0; s < 4; ++s) {
      for (int b = 0; b < config.batch; ++b) {
        const DepthMap& d = gt[static_cast<std::size_t>(b)][s];
        const double* p = pred.scales[s].channel(b, 0);
        for (std::size_t i = 0; i < d.depths.size(); ++i) {
          if (d.validity[i]) signs.push_back(p[i] > 1.0 / d.depths[i]);
        }
      }
    }
    return multiscale_l1_loss(pred, gt_span);
  };

  net.zero_grad();
  ForwardRecord<double> record;
  const Prediction<double> pred = net.forward(x, mode, &record);
  std::array<Tensor<double>, 4> grads;
  multiscale_l1_loss(pred, gt_span, &grads);
  net.backward(record, grads);

  std::vector<ParameterView<double>> params = net.parameters();
  std::size_t total = 0;
  for (const auto& p : params) total += p.value.size();
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);

  GradCheckReport report;
  std::vector<std::uint8_t> signs_plus, signs_minus;
  int attempts = 0;
  while (static_cast<int>(report.entries.size()) < config.parameters) {
    if (++attempts > 20 * config.parameters) {
      throw InvalidConfig("gradcheck could not find kink-free parameters");
    }
    std::size_t flat = pick(rng);
    std::size_t which = 0;
    while (flat >= params[which].value.size()) flat -= params[which++].value.size();
    ParameterView<double>& p = params[which];
    const double original = p.value[flat];
    p.value[flat] = original + config.step;
    const double plus = evaluate(signs_plus);
    p.value[flat] = original - config.step;
    const double minus = evaluate(signs_minus);
    p.value[flat] = original;
    // A kink inside [-step, step] makes the central difference meaningless.
    if (signs_plus != signs_minus) {
      ++report.kinks_skipped;
      continue;
    }

    GradCheckEntry e;
    e.parameter = p.name;
    e.index = flat;
    e.analytic = p.grad[flat];
    e.numeric = (plus - minus) / (2.0 * config.step);
    e.relative_error = gradient_relative_error(e.analytic, e.numeric);
    report.max_relative_error = std::max(report.max_relative_error, e.relative_error);
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace mvdepth::depthnet
