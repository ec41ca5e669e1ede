#include "mvdepth/kernels/gemm.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace mvdepth::kernels {

namespace {

constexpr int kKc = 256;
constexpr int kMc = 96;
constexpr int kNc = 3072;

template <typename T>
using MicroKernel = void (*)(int, const T*, const T*, T*);

template <typename T>
MicroKernel<T> micro_kernel(simd::Level level);

template <>
MicroKernel<float> micro_kernel<float>(simd::Level level) {
  return level == simd::Level::kAvx2 ? gemm_micro_f32_avx2 : gemm_micro_f32_scalar;
}

template <>
MicroKernel<double> micro_kernel<double>(simd::Level level) {
  return level == simd::Level::kAvx2 ? gemm_micro_f64_avx2 : gemm_micro_f64_scalar;
}

template <typename T>
inline T element(Trans t, const T* m, int ld, int row, int col) {
  return t == Trans::kNo ? m[static_cast<std::ptrdiff_t>(row) * ld + col]
                         : m[static_cast<std::ptrdiff_t>(col) * ld + row];
}

template <typename T>
void pack_a(Trans ta, const T* a, int lda, int i0, int mc, int p0, int kc, T* out) {
  constexpr int mr = GemmTile<T>::kMr;
  for (int ir = 0; ir < mc; ir += mr) {
    const int rows = std::min(mr, mc - ir);
    for (int p = 0; p < kc; ++p) {
      for (int i = 0; i < rows; ++i) out[p * mr + i] = element(ta, a, lda, i0 + ir + i, p0 + p);
      for (int i = rows; i < mr; ++i) out[p * mr + i] = T(0);
    }
    out += static_cast<std::ptrdiff_t>(kc) * mr;
  }
}

template <typename T>
void pack_b(Trans tb, const T* b, int ldb, int p0, int kc, int j0, int nc, T* out) {
  constexpr int nr = GemmTile<T>::kNr;
  for (int jr = 0; jr < nc; jr += nr) {
    const int cols = std::min(nr, nc - jr);
    for (int p = 0; p < kc; ++p) {
      T* dst = out + p * nr;
      if (tb == Trans::kNo) {
        const T* src = b + static_cast<std::ptrdiff_t>(p0 + p) * ldb + j0 + jr;
        for (int j = 0; j < cols; ++j) dst[j] = src[j];
      } else {
        for (int j = 0; j < cols; ++j) dst[j] = element(tb, b, ldb, p0 + p, j0 + jr + j);
      }
      for (int j = cols; j < nr; ++j) dst[j] = T(0);
    }
    out += static_cast<std::ptrdiff_t>(kc) * nr;
  }
}

template <typename T>
void scale_c(int m, int n, T beta, T* c, int ldc) {
  if (beta == T(1)) return;
  for (int i = 0; i < m; ++i) {
    T* row = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (beta == T(0)) {
      std::fill(row, row + n, T(0));
    } else {
      for (int j = 0; j < n; ++j) row[j] *= beta;
    }
  }
}

template <typename T>
void gemm_packed(simd::Level level, Trans ta, Trans tb, int m, int n, int k, T alpha, const T* a,
                 int lda, const T* b, int ldb, T beta, T* c, int ldc) {
  constexpr int mr = GemmTile<T>::kMr;
  constexpr int nr = GemmTile<T>::kNr;
  scale_c(m, n, beta, c, ldc);
  if (m <= 0 || n <= 0 || k <= 0 || alpha == T(0)) return;

  const MicroKernel<T> kernel = micro_kernel<T>(level);
  thread_local std::vector<T> a_pack;
  thread_local std::vector<T> b_pack;
  a_pack.resize(static_cast<std::size_t>(kKc) * (kMc + mr));
  b_pack.resize(static_cast<std::size_t>(kKc) * (kNc + nr));
  alignas(64) T tile[mr * nr];

  for (int jc = 0; jc < n; jc += kNc) {
    const int nc = std::min(kNc, n - jc);
    for (int pc = 0; pc < k; pc += kKc) {
      const int kc = std::min(kKc, k - pc);
      pack_b(tb, b, ldb, pc, kc, jc, nc, b_pack.data());
      for (int ic = 0; ic < m; ic += kMc) {
        const int mc = std::min(kMc, m - ic);
        pack_a(ta, a, lda, ic, mc, pc, kc, a_pack.data());
        for (int jr = 0; jr < nc; jr += nr) {
          const int cols = std::min(nr, nc - jr);
          const T* b_panel = b_pack.data() + static_cast<std::ptrdiff_t>(jr / nr) * kc * nr;
          for (int ir = 0; ir < mc; ir += mr) {
            const int rows = std::min(mr, mc - ir);
            const T* a_panel = a_pack.data() + static_cast<std::ptrdiff_t>(ir / mr) * kc * mr;
            kernel(kc, a_panel, b_panel, tile);
            for (int i = 0; i < rows; ++i) {
              T* crow = c + static_cast<std::ptrdiff_t>(ic + ir + i) * ldc + jc + jr;
              const T* trow = tile + i * nr;
              if (alpha == T(1)) {
                for (int j = 0; j < cols; ++j) crow[j] += trow[j];
              } else {
                for (int j = 0; j < cols; ++j) crow[j] += alpha * trow[j];
              }
            }
          }
        }
      }
    }
  }
}

template <typename T>
void micro_scalar(int kc, const T* a, const T* b, T* tile) {
  constexpr int mr = GemmTile<T>::kMr;
  constexpr int nr = GemmTile<T>::kNr;
  T acc[mr * nr] = {};
  for (int p = 0; p < kc; ++p) {
    for (int i = 0; i < mr; ++i) {
      const T av = a[i];
      for (int j = 0; j < nr; ++j) acc[i * nr + j] += av * b[j];
    }
    a += mr;
    b += nr;
  }
  std::copy(acc, acc + mr * nr, tile);
}

}  // namespace

void gemm_micro_f32_scalar(int kc, const float* a, const float* b, float* tile) {
  micro_scalar(kc, a, b, tile);
}

void gemm_micro_f64_scalar(int kc, const double* a, const double* b, double* tile) {
  micro_scalar(kc, a, b, tile);
}

#if !defined(MVDEPTH_HAVE_AVX2)
void gemm_micro_f32_avx2(int kc, const float* a, const float* b, float* tile) {
  micro_scalar(kc, a, b, tile);
}
void gemm_micro_f64_avx2(int kc, const double* a, const double* b, double* tile) {
  micro_scalar(kc, a, b, tile);
}
#endif

template <typename T>
void gemm(simd::Level level, Trans ta, Trans tb, int m, int n, int k, T alpha, const T* a,
          int lda, const T* b, int ldb, T beta, T* c, int ldc) {
  gemm_packed(level, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <typename T>
void gemm(Trans ta, Trans tb, int m, int n, int k, T alpha, const T* a, int lda, const T* b,
          int ldb, T beta, T* c, int ldc) {
  gemm_packed(simd::active_level(), ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <typename T>
void gemm_reference(Trans ta, Trans tb, int m, int n, int k, T alpha, const T* a, int lda,
                    const T* b, int ldb, T beta, T* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T sum = T(0);
      for (int p = 0; p < k; ++p) sum += element(ta, a, lda, i, p) * element(tb, b, ldb, p, j);
      T& out = c[static_cast<std::ptrdiff_t>(i) * ldc + j];
      out = (beta == T(0) ? T(0) : beta * out) + alpha * sum;
    }
  }
}

#define MVDEPTH_INSTANTIATE_GEMM(T)                                                         \
  template void gemm<T>(simd::Level, Trans, Trans, int, int, int, T, const T*, int,        \
                        const T*, int, T, T*, int);                                        \
  template void gemm<T>(Trans, Trans, int, int, int, T, const T*, int, const T*, int, T,   \
                        T*, int);                                                          \
  template void gemm_reference<T>(Trans, Trans, int, int, int, T, const T*, int, const T*, \
                                  int, T, T*, int);

MVDEPTH_INSTANTIATE_GEMM(float)
MVDEPTH_INSTANTIATE_GEMM(double)

#undef MVDEPTH_INSTANTIATE_GEMM

}  // namespace mvdepth::kernels
