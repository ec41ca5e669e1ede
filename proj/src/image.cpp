#include "mvdepth/image.hpp"

#include "mvdepth/errors.hpp"

#include <cmath>
#include <limits>

namespace mvdepth {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                static_cast<std::size_t>(channels),
            fill) {}

DepthMap::DepthMap(int width, int height)
    : depths(width, height, std::numeric_limits<double>::quiet_NaN()), validity(width, height, 0) {}

void DepthMap::set(int x, int y, double depth) {
  depths(x, y) = depth;
  validity(x, y) = 1;
}

void DepthMap::invalidate(int x, int y) {
  depths(x, y) = std::numeric_limits<double>::quiet_NaN();
  validity(x, y) = 0;
}

std::size_t DepthMap::count_valid() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < validity.size(); ++i) n += validity[i] != 0;
  return n;
}

bool DepthMap::operator==(const DepthMap& other) const {
  if (!depths.same_shape(other.depths) || validity != other.validity) return false;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (validity[i] && depths[i] != other.depths[i]) return false;
  }
  return true;
}

Image normalize(const Image& raw, const NormalizationStats& stats) {
  if (!(stats.stddev > 0.0)) throw InvalidConfig("normalization stddev must be positive");
  Image out = raw;
  const float mean = static_cast<float>(stats.mean);
  const float inv_std = static_cast<float>(1.0 / stats.stddev);
  for (float& v : out.values()) v = (v - mean) * inv_std;
  return out;
}

NormalizationStats compute_normalization(std::span<const Image> images) {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const Image& img : images) {
    for (float v : img.values()) {
      sum += v;
      sum_sq += static_cast<double>(v) * v;
    }
    n += img.values().size();
  }
  if (n == 0) return {};
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  NormalizationStats stats;
  stats.mean = mean;
  stats.stddev = var > 1e-12 ? std::sqrt(var) : 1.0;
  return stats;
}

}  // namespace mvdepth
