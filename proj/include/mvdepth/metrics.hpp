#pragma once

#include "mvdepth/image.hpp"

#include <cstddef>
#include <string>

namespace mvdepth {

/// Depth-map error measures over pixels where both maps are valid.
struct MetricsReport {
  double l1_rel = 0.0;       // mean |d - g| / g
  double l1_inv = 0.0;       // mean |1/d - 1/g|
  double sc_inv = 0.0;       // scale-invariant log error, natural log
  double cp_pct = 0.0;       // % with |d - g| / g <= 0.1
  double density_pct = 0.0;  // % of valid-GT pixels with a valid prediction
  std::size_t n = 0;
};

/// Relative-error bound of the correct-percentage measure (inclusive).
inline constexpr double kCorrectRelativeError = 0.1;

/// Throws ResolutionMismatch or EmptyOverlap.
MetricsReport evaluate(const DepthMap& prediction, const DepthMap& ground_truth);

/// Pools pixels of several prediction/ground-truth pairs into one report.
class MetricsAccumulator {
 public:
  /// Throws ResolutionMismatch.
  void add(const DepthMap& prediction, const DepthMap& ground_truth);
  /// Throws EmptyOverlap when no pixel was jointly valid.
  MetricsReport report() const;

 private:
  double rel_ = 0.0;
  double inv_ = 0.0;
  std::size_t correct_ = 0;
  std::size_t gt_valid_ = 0;
  std::size_t n_ = 0;
  // z is accumulated relative to the first z so that a constant offset
  // gives an exactly zero variance.
  double z0_ = 0.0;
  double z_sum_ = 0.0;
  double z_sq_ = 0.0;
};

/// {"l1_rel":..,"l1_inv":..,"sc_inv":..,"cp_pct":..,"density_pct":..,"n":..}
std::string to_json(const MetricsReport& report);

}  // namespace mvdepth
