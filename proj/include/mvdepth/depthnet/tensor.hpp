#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace mvdepth::depthnet {

struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
           static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }
  bool operator==(const Shape&) const = default;
};

/// Dense NCHW tensor.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.count(), fill) {}
  Tensor(int n, int c, int h, int w, T fill = T(0)) : Tensor(Shape{n, c, h, w}, fill) {}

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane() const {
    return static_cast<std::size_t>(shape_.h) * static_cast<std::size_t>(shape_.w);
  }
  std::size_t sample_size() const { return static_cast<std::size_t>(shape_.c) * plane(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T* sample(int i) { return data_.data() + static_cast<std::size_t>(i) * sample_size(); }
  const T* sample(int i) const {
    return data_.data() + static_cast<std::size_t>(i) * sample_size();
  }
  T* channel(int i, int c) { return sample(i) + static_cast<std::size_t>(c) * plane(); }
  const T* channel(int i, int c) const {
    return sample(i) + static_cast<std::size_t>(c) * plane();
  }

  T& at(int i, int c, int y, int x) {
    return channel(i, c)[static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.w) +
                         static_cast<std::size_t>(x)];
  }
  T at(int i, int c, int y, int x) const {
    return channel(i, c)[static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_.w) +
                         static_cast<std::size_t>(x)];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  Shape shape_;
  std::vector<T> data_;
};

}  // namespace mvdepth::depthnet
