#include "mvdepth/metrics.hpp"

#include "mvdepth/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace mvdepth {

void MetricsAccumulator::add(const DepthMap& prediction, const DepthMap& ground_truth) {
  if (!prediction.depths.same_shape(ground_truth.depths)) {
    throw ResolutionMismatch("prediction is " + std::to_string(prediction.width()) + "x" +
                             std::to_string(prediction.height()) + ", ground truth is " +
                             std::to_string(ground_truth.width()) + "x" +
                             std::to_string(ground_truth.height()));
  }
  for (std::size_t i = 0; i < ground_truth.depths.size(); ++i) {
    if (!ground_truth.validity[i]) continue;
    ++gt_valid_;
    if (!prediction.validity[i]) continue;
    const double d = prediction.depths[i];
    const double g = ground_truth.depths[i];
    const double rel_err = std::abs(d - g) / g;
    rel_ += rel_err;
    inv_ += std::abs(1.0 / d - 1.0 / g);
    correct_ += rel_err <= kCorrectRelativeError;
    const double z = std::log(d) - std::log(g);
    if (n_ == 0) z0_ = z;
    z_sum_ += z - z0_;
    z_sq_ += (z - z0_) * (z - z0_);
    ++n_;
  }
}

MetricsReport MetricsAccumulator::report() const {
  if (n_ == 0) throw EmptyOverlap("no pixel is valid in both prediction and ground truth");
  const double count = static_cast<double>(n_);
  MetricsReport r;
  r.n = n_;
  r.l1_rel = rel_ / count;
  r.l1_inv = inv_ / count;
  const double mean = z_sum_ / count;
  r.sc_inv = std::sqrt(std::max(0.0, z_sq_ / count - mean * mean));
  r.cp_pct = 100.0 * static_cast<double>(correct_) / count;
  r.density_pct = 100.0 * count / static_cast<double>(gt_valid_);
  return r;
}

MetricsReport evaluate(const DepthMap& prediction, const DepthMap& ground_truth) {
  MetricsAccumulator acc;
  acc.add(prediction, ground_truth);
  return acc.report();
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["l1_rel"] = report.l1_rel;
  j["l1_inv"] = report.l1_inv;
  j["sc_inv"] = report.sc_inv;
  j["cp_pct"] = report.cp_pct;
  j["density_pct"] = report.density_pct;
  j["n"] = report.n;
  return j.dump();
}

}  // namespace mvdepth
