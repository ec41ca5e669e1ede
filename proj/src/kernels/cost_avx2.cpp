// Compiled with -mavx2 -mfma. Keep this file free of inline library
// templates so no AVX2-encoded instantiation can be merged into scalar
// callers by the linker.
#include "mvdepth/kernels/cost_kernels.hpp"

#include <immintrin.h>

namespace mvdepth::kernels {

namespace {

inline __m256d gather_plane(const float* plane, __m128i idx) {
  return _mm256_cvtps_pd(_mm_i32gather_ps(plane, idx, 4));
}

}  // namespace

void warp_cost_row_avx2(const WarpCostRow& a) {
  const double* p = a.homography;
  const double y = static_cast<double>(a.y);
  const double row_x = p[1] * y + p[2];
  const double row_y = p[4] * y + p[5];
  const double row_z = p[7] * y + p[8];
  const long plane = static_cast<long>(a.width) * static_cast<long>(a.height);
  const long row_offset = static_cast<long>(a.y) * static_cast<long>(a.width);
  const double inv_channels = 1.0 / static_cast<double>(a.channels);
  const double max_u = static_cast<double>(a.width - 1);
  const double max_v = static_cast<double>(a.height - 1);
  const double lim_x = max_u - 1.0 > 0.0 ? max_u - 1.0 : 0.0;
  const double lim_y = max_v - 1.0 > 0.0 ? max_v - 1.0 : 0.0;

  const __m256d p0 = _mm256_set1_pd(p[0]);
  const __m256d p3 = _mm256_set1_pd(p[3]);
  const __m256d p6 = _mm256_set1_pd(p[6]);
  const __m256d rx = _mm256_set1_pd(row_x);
  const __m256d ry = _mm256_set1_pd(row_y);
  const __m256d rz = _mm256_set1_pd(row_z);
  const __m256d min_depth = _mm256_set1_pd(kMinWarpDepth);
  const __m256d lo = _mm256_set1_pd(-kSampleBoundsTolerance);
  const __m256d hi_u = _mm256_set1_pd(max_u + kSampleBoundsTolerance);
  const __m256d hi_v = _mm256_set1_pd(max_v + kSampleBoundsTolerance);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vmax_u = _mm256_set1_pd(max_u);
  const __m256d vmax_v = _mm256_set1_pd(max_v);
  const __m256d vlim_x = _mm256_set1_pd(lim_x);
  const __m256d vlim_y = _mm256_set1_pd(lim_y);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d vinv_c = _mm256_set1_pd(inv_channels);
  const __m128i vwidth = _mm_set1_epi32(a.width);
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

  int x = 0;
  for (; x + 4 <= a.width; x += 4) {
    const __m256d xd = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(x)), lane);
    const __m256d hz = _mm256_add_pd(_mm256_mul_pd(p6, xd), rz);
    const __m256d front = _mm256_cmp_pd(hz, min_depth, _CMP_GT_OQ);
    if (_mm256_movemask_pd(front) == 0) continue;
    const __m256d u = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(p0, xd), rx), hz);
    const __m256d v = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(p3, xd), ry), hz);
    __m256d valid = _mm256_and_pd(front, _mm256_cmp_pd(u, lo, _CMP_GE_OQ));
    valid = _mm256_and_pd(valid, _mm256_cmp_pd(u, hi_u, _CMP_LE_OQ));
    valid = _mm256_and_pd(valid, _mm256_cmp_pd(v, lo, _CMP_GE_OQ));
    valid = _mm256_and_pd(valid, _mm256_cmp_pd(v, hi_v, _CMP_LE_OQ));
    const int bits = _mm256_movemask_pd(valid);
    if (bits == 0) continue;

    const __m256d us = _mm256_blendv_pd(zero, u, valid);
    const __m256d vs = _mm256_blendv_pd(zero, v, valid);
    const __m256d uc = _mm256_min_pd(_mm256_max_pd(us, zero), vmax_u);
    const __m256d vc = _mm256_min_pd(_mm256_max_pd(vs, zero), vmax_v);
    const __m256d x0 = _mm256_min_pd(_mm256_floor_pd(uc), vlim_x);
    const __m256d y0 = _mm256_min_pd(_mm256_floor_pd(vc), vlim_y);
    const __m256d x1 = _mm256_min_pd(_mm256_add_pd(x0, one), vmax_u);
    const __m256d y1 = _mm256_min_pd(_mm256_add_pd(y0, one), vmax_v);
    const __m256d fx = _mm256_sub_pd(uc, x0);
    const __m256d fy = _mm256_sub_pd(vc, y0);

    const __m128i ix0 = _mm256_cvttpd_epi32(x0);
    const __m128i ix1 = _mm256_cvttpd_epi32(x1);
    const __m128i row0 = _mm_mullo_epi32(_mm256_cvttpd_epi32(y0), vwidth);
    const __m128i row1 = _mm_mullo_epi32(_mm256_cvttpd_epi32(y1), vwidth);
    const __m128i i00 = _mm_add_epi32(row0, ix0);
    const __m128i i01 = _mm_add_epi32(row0, ix1);
    const __m128i i10 = _mm_add_epi32(row1, ix0);
    const __m128i i11 = _mm_add_epi32(row1, ix1);

    __m256d ad = zero;
    for (int c = 0; c < a.channels; ++c) {
      const float* meas = a.measurement + c * plane;
      const __m256d s00 = gather_plane(meas, i00);
      const __m256d s01 = gather_plane(meas, i01);
      const __m256d s10 = gather_plane(meas, i10);
      const __m256d s11 = gather_plane(meas, i11);
      const __m256d top = _mm256_add_pd(s00, _mm256_mul_pd(_mm256_sub_pd(s01, s00), fx));
      const __m256d bottom = _mm256_add_pd(s10, _mm256_mul_pd(_mm256_sub_pd(s11, s10), fx));
      const __m256d sample = _mm256_add_pd(top, _mm256_mul_pd(_mm256_sub_pd(bottom, top), fy));
      const __m256d ref = _mm256_cvtps_pd(_mm_loadu_ps(a.reference + c * plane + row_offset + x));
      ad = _mm256_add_pd(ad, _mm256_andnot_pd(sign, _mm256_sub_pd(ref, sample)));
    }
    ad = _mm256_and_pd(_mm256_mul_pd(ad, vinv_c), valid);
    _mm256_storeu_pd(a.cost_row + x, _mm256_add_pd(_mm256_loadu_pd(a.cost_row + x), ad));
    for (int k = 0; k < 4; ++k) {
      if (bits & (1 << k)) a.count_row[x + k] += 1;
    }
  }

  {
    // Remainder mirrors warp_cost_row_scalar.
    for (int xx = x; xx < a.width; ++xx) {
      const double xd = static_cast<double>(xx);
      const double hz = p[6] * xd + row_z;
      if (!(hz > kMinWarpDepth)) continue;
      const double u = (p[0] * xd + row_x) / hz;
      const double v = (p[3] * xd + row_y) / hz;
      if (!(u >= -kSampleBoundsTolerance && u <= max_u + kSampleBoundsTolerance &&
            v >= -kSampleBoundsTolerance && v <= max_v + kSampleBoundsTolerance)) {
        continue;
      }
      double uc = u < 0.0 ? 0.0 : u;
      uc = uc > max_u ? max_u : uc;
      double vc = v < 0.0 ? 0.0 : v;
      vc = vc > max_v ? max_v : vc;
      double fx0 = __builtin_floor(uc);
      double fy0 = __builtin_floor(vc);
      fx0 = fx0 > lim_x ? lim_x : fx0;
      fy0 = fy0 > lim_y ? lim_y : fy0;
      const int ix = static_cast<int>(fx0);
      const int iy = static_cast<int>(fy0);
      const int jx = ix + 1 < a.width ? ix + 1 : a.width - 1;
      const int jy = iy + 1 < a.height ? iy + 1 : a.height - 1;
      const double wx = uc - fx0;
      const double wy = vc - fy0;
      double ad = 0.0;
      for (int c = 0; c < a.channels; ++c) {
        const float* meas = a.measurement + c * plane;
        const double s00 = meas[iy * a.width + ix];
        const double s01 = meas[iy * a.width + jx];
        const double s10 = meas[jy * a.width + ix];
        const double s11 = meas[jy * a.width + jx];
        const double top = s00 + (s01 - s00) * wx;
        const double bottom = s10 + (s11 - s10) * wx;
        const double sample = top + (bottom - top) * wy;
        const double diff = static_cast<double>(a.reference[c * plane + row_offset + xx]) - sample;
        ad += diff < 0.0 ? -diff : diff;
      }
      a.cost_row[xx] += ad * inv_channels;
      a.count_row[xx] += 1;
    }
  }
}

void argmin_update_avx2(const ArgminPlane& a) {
  const __m256i izero = _mm256_setzero_si256();
  const __m128i index = _mm_set1_epi32(a.index);
  const __m256i pack_lo = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  std::size_t i = 0;
  for (; i + 4 <= a.n; i += 4) {
    const __m256d cost = _mm256_loadu_pd(a.cost + i);
    const __m256d best = _mm256_loadu_pd(a.best_cost + i);
    const __m128i counts16 = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(a.counts + i));
    const __m256i counts = _mm256_cvtepu16_epi64(counts16);
    const __m256d has = _mm256_castsi256_pd(_mm256_cmpgt_epi64(counts, izero));
    const __m256d take = _mm256_and_pd(has, _mm256_cmp_pd(cost, best, _CMP_LT_OQ));
    if (_mm256_movemask_pd(take) == 0) continue;
    _mm256_storeu_pd(a.best_cost + i, _mm256_blendv_pd(best, cost, take));
    const __m128i take32 = _mm256_castsi256_si128(
        _mm256_permutevar8x32_epi32(_mm256_castpd_si256(take), pack_lo));
    __m128i* idx_ptr = reinterpret_cast<__m128i*>(a.best_index + i);
    _mm_storeu_si128(idx_ptr, _mm_blendv_epi8(_mm_loadu_si128(idx_ptr), index, take32));
  }
  for (; i < a.n; ++i) {
    if (a.counts[i] > 0 && a.cost[i] < a.best_cost[i]) {
      a.best_cost[i] = a.cost[i];
      a.best_index[i] = a.index;
    }
  }
}

}  // namespace mvdepth::kernels
