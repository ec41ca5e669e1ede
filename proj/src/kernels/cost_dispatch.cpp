#include "mvdepth/kernels/cost_kernels.hpp"
#include "mvdepth/simd/dispatch.hpp"

namespace mvdepth::kernels {

#if !defined(MVDEPTH_HAVE_AVX2)
void warp_cost_row_avx2(const WarpCostRow& args) { warp_cost_row_scalar(args); }
void argmin_update_avx2(const ArgminPlane& args) { argmin_update_scalar(args); }
#endif

void warp_cost_row(const WarpCostRow& args) {
  if (simd::active_level() == simd::Level::kAvx2) {
    warp_cost_row_avx2(args);
  } else {
    warp_cost_row_scalar(args);
  }
}

void argmin_update(const ArgminPlane& args) {
  if (simd::active_level() == simd::Level::kAvx2) {
    argmin_update_avx2(args);
  } else {
    argmin_update_scalar(args);
  }
}

}  // namespace mvdepth::kernels
