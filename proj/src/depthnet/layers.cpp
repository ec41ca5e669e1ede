#include "mvdepth/depthnet/layers.hpp"

#include "mvdepth/kernels/gemm.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace mvdepth::depthnet {

namespace {

// Upper bound on im2col buffer elements; larger layers are processed in
// column chunks.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

struct ConvDims {
  int cin, hin, win, hout, wout, k, s, pad;
  int rows() const { return cin * k * k; }
  int pixels() const { return hout * wout; }
};

ConvDims dims_of(const Shape& x, const ConvGeometry& g) {
  return {x.c, x.h, x.w, conv_output_size(x.h, g), conv_output_size(x.w, g), g.kernel, g.stride,
          g.pad};
}

int chunk_columns(const ConvDims& d) {
  const std::size_t per = kColumnBudget / static_cast<std::size_t>(std::max(1, d.rows()));
  return static_cast<int>(std::clamp<std::size_t>(per, 1, static_cast<std::size_t>(d.pixels())));
}

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Walks the output pixels [p0, p0 + pc) one output row segment at a time and
// calls fn(j, run, iy, lo, hi, ix0) for each kernel tap: columns j + [lo, hi)
// read input row iy starting at ix0 with the conv stride; the rest of the
// segment lies in the zero padding.
template <typename Fn>
void for_each_segment(const ConvDims& d, int p0, int pc, int ky, int kx, Fn&& fn) {
  int oy = p0 / d.wout;
  int ox = p0 % d.wout;
  // Output columns whose input column falls inside [0, win).
  const int ox_first = std::max(0, ceil_div(d.pad - kx, d.s));
  const int ox_end = std::min(d.wout, floor_div(d.win - 1 + d.pad - kx, d.s) + 1);
  for (int j = 0; j < pc;) {
    const int run = std::min(d.wout - ox, pc - j);
    const int iy = oy * d.s - d.pad + ky;
    int lo = 0;
    int hi = 0;
    if (iy >= 0 && iy < d.hin) {
      lo = std::clamp(ox_first - ox, 0, run);
      hi = std::clamp(ox_end - ox, lo, run);
    }
    fn(j, run, iy, lo, hi, (ox + lo) * d.s - d.pad + kx);
    j += run;
    ox = 0;
    ++oy;
  }
}

template <typename T>
void im2col(const T* x, const ConvDims& d, int p0, int pc, T* col) {
  for (int c = 0; c < d.cin; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * d.hin * d.win;
    for (int ky = 0; ky < d.k; ++ky) {
      for (int kx = 0; kx < d.k; ++kx) {
        T* dst = col + static_cast<std::size_t>((c * d.k + ky) * d.k + kx) * pc;
        for_each_segment(d, p0, pc, ky, kx, [&](int j, int run, int iy, int lo, int hi, int ix0) {
          T* out = dst + j;
          std::fill(out, out + lo, T(0));
          if (hi > lo) {
            const T* src = plane + static_cast<std::size_t>(iy) * d.win + ix0;
            if (d.s == 1) {
              std::copy(src, src + (hi - lo), out + lo);
            } else {
              for (int t = lo; t < hi; ++t) out[t] = src[(t - lo) * d.s];
            }
          }
          std::fill(out + hi, out + run, T(0));
        });
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvDims& d, int p0, int pc, T* dx) {
  for (int c = 0; c < d.cin; ++c) {
    T* plane = dx + static_cast<std::size_t>(c) * d.hin * d.win;
    for (int ky = 0; ky < d.k; ++ky) {
      for (int kx = 0; kx < d.k; ++kx) {
        const T* src = col + static_cast<std::size_t>((c * d.k + ky) * d.k + kx) * pc;
        for_each_segment(d, p0, pc, ky, kx, [&](int j, int, int iy, int lo, int hi, int ix0) {
          if (hi <= lo) return;
          T* out = plane + static_cast<std::size_t>(iy) * d.win + ix0;
          const T* in = src + j;
          for (int t = lo; t < hi; ++t) out[(t - lo) * d.s] += in[t];
        });
      }
    }
  }
}

struct Taps {
  std::vector<int> lo, hi;
  std::vector<double> frac;
};

Taps resize_taps(int in, int out) {
  Taps t;
  t.lo.resize(static_cast<std::size_t>(out));
  t.hi.resize(static_cast<std::size_t>(out));
  t.frac.resize(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (int o = 0; o < out; ++o) {
    const double src = std::max((o + 0.5) * scale - 0.5, 0.0);
    const int lo = std::min(static_cast<int>(src), in - 1);
    const auto idx = static_cast<std::size_t>(o);
    t.lo[idx] = lo;
    t.hi[idx] = std::min(lo + 1, in - 1);
    t.frac[idx] = src - lo;
  }
  return t;
}

}  // namespace

int conv_output_size(int in, const ConvGeometry& g) {
  return (in + 2 * g.pad - g.kernel) / g.stride + 1;
}

template <typename T>
void conv2d_forward(const Tensor<T>& x, const T* weight, int out_channels, const ConvGeometry& g,
                    Tensor<T>& y) {
  const ConvDims d = dims_of(x.shape(), g);
  y = Tensor<T>(x.n(), out_channels, d.hout, d.wout);
  const int rows = d.rows();
  const int pixels = d.pixels();
  const int chunk = chunk_columns(d);
  std::vector<T> col(static_cast<std::size_t>(rows) * chunk);
  for (int i = 0; i < x.n(); ++i) {
    for (int p0 = 0; p0 < pixels; p0 += chunk) {
      const int pc = std::min(chunk, pixels - p0);
      im2col(x.sample(i), d, p0, pc, col.data());
      kernels::gemm<T>(kernels::Trans::kNo, kernels::Trans::kNo, out_channels, pc, rows, T(1),
                       weight, rows, col.data(), pc, T(0), y.sample(i) + p0, pixels);
    }
  }
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const T* weight, int out_channels, const ConvGeometry& g,
                     const Tensor<T>& dy, T* dweight, Tensor<T>* dx) {
  const ConvDims d = dims_of(x.shape(), g);
  const int rows = d.rows();
  const int pixels = d.pixels();
  const int chunk = chunk_columns(d);
  std::vector<T> col(static_cast<std::size_t>(rows) * chunk);
  std::vector<T> dcol(dx ? static_cast<std::size_t>(rows) * chunk : 0);
  for (int i = 0; i < x.n(); ++i) {
    for (int p0 = 0; p0 < pixels; p0 += chunk) {
      const int pc = std::min(chunk, pixels - p0);
      im2col(x.sample(i), d, p0, pc, col.data());
      kernels::gemm<T>(kernels::Trans::kNo, kernels::Trans::kYes, out_channels, rows, pc, T(1),
                       dy.sample(i) + p0, pixels, col.data(), pc, T(1), dweight, rows);
      if (dx) {
        kernels::gemm<T>(kernels::Trans::kYes, kernels::Trans::kNo, rows, pc, out_channels, T(1),
                         weight, rows, dy.sample(i) + p0, pixels, T(0), dcol.data(), pc);
        col2im_add(dcol.data(), d, p0, pc, dx->sample(i));
      }
    }
  }
}

template <typename T>
void conv2d_reference(const Tensor<T>& x, const T* weight, int out_channels,
                      const ConvGeometry& g, Tensor<T>& y) {
  const ConvDims d = dims_of(x.shape(), g);
  y = Tensor<T>(x.n(), out_channels, d.hout, d.wout);
  for (int i = 0; i < x.n(); ++i) {
    for (int o = 0; o < out_channels; ++o) {
      for (int oy = 0; oy < d.hout; ++oy) {
        for (int ox = 0; ox < d.wout; ++ox) {
          T sum = T(0);
          for (int c = 0; c < d.cin; ++c) {
            for (int ky = 0; ky < d.k; ++ky) {
              const int iy = oy * d.s - d.pad + ky;
              if (iy < 0 || iy >= d.hin) continue;
              for (int kx = 0; kx < d.k; ++kx) {
                const int ix = ox * d.s - d.pad + kx;
                if (ix < 0 || ix >= d.win) continue;
                sum += weight[((static_cast<std::size_t>(o) * d.cin + c) * d.k + ky) * d.k + kx] *
                       x.at(i, c, iy, ix);
              }
            }
          }
          y.at(i, o, oy, ox) = sum;
        }
      }
    }
  }
}

template <typename T>
void batchnorm_forward(const Tensor<T>& z, const T* gamma, const T* beta, T* running_mean,
                       T* running_var, bool training, bool update_running,
                       const BatchNormSettings& settings, Tensor<T>& y, BatchNormCache<T>* cache) {
  const int channels = z.c();
  const std::size_t plane = z.plane();
  const std::size_t count = static_cast<std::size_t>(z.n()) * plane;
  y = Tensor<T>(z.shape());
  if (cache) {
    cache->training = training;
    cache->inv_std.assign(static_cast<std::size_t>(channels), 0.0);
    cache->xhat = Tensor<T>(z.shape());
  }
  for (int c = 0; c < channels; ++c) {
    double mean;
    double var;
    if (training) {
      double sum = 0.0;
      for (int i = 0; i < z.n(); ++i) {
        const T* p = z.channel(i, c);
        for (std::size_t j = 0; j < plane; ++j) sum += static_cast<double>(p[j]);
      }
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (int i = 0; i < z.n(); ++i) {
        const T* p = z.channel(i, c);
        for (std::size_t j = 0; j < plane; ++j) {
          const double dv = static_cast<double>(p[j]) - mean;
          sq += dv * dv;
        }
      }
      var = sq / static_cast<double>(count);
      if (update_running) {
        const double unbiased =
            count > 1 ? var * static_cast<double>(count) / static_cast<double>(count - 1) : var;
        running_mean[c] = static_cast<T>((1.0 - settings.momentum) * running_mean[c] +
                                         settings.momentum * mean);
        running_var[c] = static_cast<T>((1.0 - settings.momentum) * running_var[c] +
                                        settings.momentum * unbiased);
      }
    } else {
      mean = static_cast<double>(running_mean[c]);
      var = static_cast<double>(running_var[c]);
    }
    const double inv_std = 1.0 / std::sqrt(var + settings.epsilon);
    if (cache) cache->inv_std[static_cast<std::size_t>(c)] = inv_std;
    const T g = gamma[c];
    const T b = beta[c];
    for (int i = 0; i < z.n(); ++i) {
      const T* src = z.channel(i, c);
      T* dst = y.channel(i, c);
      T* xh = cache ? cache->xhat.channel(i, c) : nullptr;
      for (std::size_t j = 0; j < plane; ++j) {
        const T normalized = static_cast<T>((static_cast<double>(src[j]) - mean) * inv_std);
        if (xh) xh[j] = normalized;
        dst[j] = g * normalized + b;
      }
    }
  }
}

template <typename T>
void batchnorm_backward(const Tensor<T>& dy, const T* gamma, const BatchNormCache<T>& cache,
                        T* dgamma, T* dbeta, Tensor<T>& dz) {
  const int channels = dy.c();
  const std::size_t plane = dy.plane();
  const double count = static_cast<double>(dy.n()) * static_cast<double>(plane);
  for (int c = 0; c < channels; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (int i = 0; i < dy.n(); ++i) {
      const T* g = dy.channel(i, c);
      const T* xh = cache.xhat.channel(i, c);
      for (std::size_t j = 0; j < plane; ++j) {
        sum_dy += static_cast<double>(g[j]);
        sum_dy_xhat += static_cast<double>(g[j]) * static_cast<double>(xh[j]);
      }
    }
    dgamma[c] += static_cast<T>(sum_dy_xhat);
    dbeta[c] += static_cast<T>(sum_dy);
    const double gm = static_cast<double>(gamma[c]);
    const double inv_std = cache.inv_std[static_cast<std::size_t>(c)];
    for (int i = 0; i < dy.n(); ++i) {
      const T* g = dy.channel(i, c);
      const T* xh = cache.xhat.channel(i, c);
      T* out = dz.channel(i, c);
      if (cache.training) {
        // dz = gamma * inv_std / N * (N dy - sum(dy) - xhat * sum(dy * xhat))
        const double scale = gm * inv_std / count;
        for (std::size_t j = 0; j < plane; ++j) {
          out[j] += static_cast<T>(scale * (count * static_cast<double>(g[j]) - sum_dy -
                                            static_cast<double>(xh[j]) * sum_dy_xhat));
        }
      } else {
        const double scale = gm * inv_std;
        for (std::size_t j = 0; j < plane; ++j) out[j] += static_cast<T>(scale * g[j]);
      }
    }
  }
}

template <typename T>
void upsample_bilinear_forward(const Tensor<T>& x, int out_h, int out_w, Tensor<T>& y) {
  y = Tensor<T>(x.n(), x.c(), out_h, out_w);
  const Taps ty = resize_taps(x.h(), out_h);
  const Taps tx = resize_taps(x.w(), out_w);
  for (int i = 0; i < x.n(); ++i) {
    for (int c = 0; c < x.c(); ++c) {
      const T* src = x.channel(i, c);
      T* dst = y.channel(i, c);
      for (int oy = 0; oy < out_h; ++oy) {
        const auto yi = static_cast<std::size_t>(oy);
        const T* r0 = src + static_cast<std::size_t>(ty.lo[yi]) * x.w();
        const T* r1 = src + static_cast<std::size_t>(ty.hi[yi]) * x.w();
        const T fy = static_cast<T>(ty.frac[yi]);
        for (int ox = 0; ox < out_w; ++ox) {
          const auto xi = static_cast<std::size_t>(ox);
          const T fx = static_cast<T>(tx.frac[xi]);
          const T top = (T(1) - fx) * r0[tx.lo[xi]] + fx * r0[tx.hi[xi]];
          const T bottom = (T(1) - fx) * r1[tx.lo[xi]] + fx * r1[tx.hi[xi]];
          dst[static_cast<std::size_t>(oy) * out_w + ox] = (T(1) - fy) * top + fy * bottom;
        }
      }
    }
  }
}

template <typename T>
void upsample_bilinear_backward(const Tensor<T>& dy, Tensor<T>& dx) {
  const Taps ty = resize_taps(dx.h(), dy.h());
  const Taps tx = resize_taps(dx.w(), dy.w());
  for (int i = 0; i < dy.n(); ++i) {
    for (int c = 0; c < dy.c(); ++c) {
      const T* g = dy.channel(i, c);
      T* out = dx.channel(i, c);
      for (int oy = 0; oy < dy.h(); ++oy) {
        const auto yi = static_cast<std::size_t>(oy);
        T* r0 = out + static_cast<std::size_t>(ty.lo[yi]) * dx.w();
        T* r1 = out + static_cast<std::size_t>(ty.hi[yi]) * dx.w();
        const T fy = static_cast<T>(ty.frac[yi]);
        for (int ox = 0; ox < dy.w(); ++ox) {
          const auto xi = static_cast<std::size_t>(ox);
          const T fx = static_cast<T>(tx.frac[xi]);
          const T v = g[static_cast<std::size_t>(oy) * dy.w() + ox];
          r0[tx.lo[xi]] += (T(1) - fy) * (T(1) - fx) * v;
          r0[tx.hi[xi]] += (T(1) - fy) * fx * v;
          r1[tx.lo[xi]] += fy * (T(1) - fx) * v;
          r1[tx.hi[xi]] += fy * fx * v;
        }
      }
    }
  }
}

#define MVDEPTH_INSTANTIATE_LAYERS(T)                                                          \
  template void conv2d_forward<T>(const Tensor<T>&, const T*, int, const ConvGeometry&,       \
                                  Tensor<T>&);                                                \
  template void conv2d_backward<T>(const Tensor<T>&, const T*, int, const ConvGeometry&,      \
                                   const Tensor<T>&, T*, Tensor<T>*);                         \
  template void conv2d_reference<T>(const Tensor<T>&, const T*, int, const ConvGeometry&,     \
                                    Tensor<T>&);                                              \
  template void batchnorm_forward<T>(const Tensor<T>&, const T*, const T*, T*, T*, bool, bool, \
                                     const BatchNormSettings&, Tensor<T>&, BatchNormCache<T>*); \
  template void batchnorm_backward<T>(const Tensor<T>&, const T*, const BatchNormCache<T>&,   \
                                      T*, T*, Tensor<T>&);                                    \
  template void upsample_bilinear_forward<T>(const Tensor<T>&, int, int, Tensor<T>&);          \
  template void upsample_bilinear_backward<T>(const Tensor<T>&, Tensor<T>&);

MVDEPTH_INSTANTIATE_LAYERS(float)
MVDEPTH_INSTANTIATE_LAYERS(double)

#undef MVDEPTH_INSTANTIATE_LAYERS

}  // namespace mvdepth::depthnet
