#pragma once

#include "mvdepth/cost_volume.hpp"
#include "mvdepth/image.hpp"

#include <cstdint>

namespace mvdepth {

/// Per-pixel winner-take-all result; index -1 marks pixels without any
/// contributing measurement.
struct ArgminResult {
  Grid<std::int32_t> indices;
  Mask validity;
};

/// Index of the minimal cost among cells with valid_counts > 0. Ties go to
/// the smaller index (the farther depth).
ArgminResult argmin_depth(const CostVolume& volume);

/// Parabolic sub-sample refinement along the inverse-depth axis. The vertex
/// offset is clamped to [-0.5, 0.5] steps; boundary indices and indices with
/// an invalid neighbor keep the sampled value.
DepthMap subsample_refine(const CostVolume& volume, const ArgminResult& argmin);

/// Vertex offset, in steps, of the parabola through (-1, prev), (0, center),
/// (1, next), clamped to [-0.5, 0.5]. Zero for flat or non-convex triples.
double parabola_offset(double prev, double center, double next);

/// argmin_depth followed by subsample_refine, or plain 1/inverse_depth of the
/// winning sample when `refine` is false.
DepthMap extract_depth(const CostVolume& volume, bool refine = true);

}  // namespace mvdepth
