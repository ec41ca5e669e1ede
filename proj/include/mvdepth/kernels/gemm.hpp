#pragma once

// Dense matrix product used by the convolution layers (im2col form).
//
// gemm() packs operands into MR x kc and kc x NR panels and hands each tile
// to a micro-kernel: scalar reference or AVX2/FMA, chosen per call from
// simd::active_level(). gemm_reference() is the naive triple loop the
// packed path is tested against.

#include "mvdepth/simd/dispatch.hpp"

namespace mvdepth::kernels {

enum class Trans { kNo, kYes };

/// Register tile shape shared by every micro-kernel of a given type, so one
/// packing format serves all tiers.
template <typename T>
struct GemmTile;
template <>
struct GemmTile<float> {
  static constexpr int kMr = 6;
  static constexpr int kNr = 16;
};
template <>
struct GemmTile<double> {
  static constexpr int kMr = 6;
  static constexpr int kNr = 8;
};

/// C = alpha * op(A) * op(B) + beta * C, all row-major. op(A) is m x k and
/// op(B) is k x n. With beta == 0, C is overwritten without being read.
template <typename T>
void gemm(Trans trans_a, Trans trans_b, int m, int n, int k, T alpha, const T* a, int lda,
          const T* b, int ldb, T beta, T* c, int ldc);

template <typename T>
void gemm(simd::Level level, Trans trans_a, Trans trans_b, int m, int n, int k, T alpha,
          const T* a, int lda, const T* b, int ldb, T beta, T* c, int ldc);

template <typename T>
void gemm_reference(Trans trans_a, Trans trans_b, int m, int n, int k, T alpha, const T* a,
                    int lda, const T* b, int ldb, T beta, T* c, int ldc);

// Micro-kernels: tile[MR x NR] = sum_p a_panel[p*MR + i] * b_panel[p*NR + j].
void gemm_micro_f32_scalar(int kc, const float* a_panel, const float* b_panel, float* tile);
void gemm_micro_f32_avx2(int kc, const float* a_panel, const float* b_panel, float* tile);
void gemm_micro_f64_scalar(int kc, const double* a_panel, const double* b_panel, double* tile);
void gemm_micro_f64_avx2(int kc, const double* a_panel, const double* b_panel, double* tile);

}  // namespace mvdepth::kernels
