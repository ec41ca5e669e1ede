#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mvdepth {

/// Row-major H x W grid of values.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Mask = Grid<std::uint8_t>;

/// Planar multi-channel float image: channel c occupies a contiguous H x W
/// plane. Raw images hold intensities in [0, 1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  float& at(int c, int x, int y) { return data_[offset(c, x, y)]; }
  float at(int c, int x, int y) const { return data_[offset(c, x, y)]; }

  std::span<float> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> plane(int c) const {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int c, int x, int y) const {
    return static_cast<std::size_t>(c) * plane_size() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Per-pixel depth in meters with an explicit validity mask. Invalid pixels
/// store NaN in `depths` so they can never be mistaken for a measurement.
struct DepthMap {
  Grid<double> depths;
  Mask validity;

  DepthMap() = default;
  DepthMap(int width, int height);

  int width() const { return depths.width(); }
  int height() const { return depths.height(); }
  bool valid(int x, int y) const { return validity(x, y) != 0; }
  void set(int x, int y, double depth);
  void invalidate(int x, int y);
  std::size_t count_valid() const;

  bool operator==(const DepthMap&) const;
};

/// Scalar intensity normalization (v - mean) / stddev shared by all channels.
struct NormalizationStats {
  double mean = 0.0;
  double stddev = 1.0;
};

Image normalize(const Image& raw, const NormalizationStats& stats);
NormalizationStats compute_normalization(std::span<const Image> images);

}  // namespace mvdepth
