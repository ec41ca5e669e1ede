#pragma once

#include <stdexcept>
#include <string>

namespace mvdepth {

/// Base of every error the library throws. The CLI maps these to exit
/// status 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MVDEPTH_DEFINE_ERROR(Name)      \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

// geometry
MVDEPTH_DEFINE_ERROR(NonPositiveDepth);
MVDEPTH_DEFINE_ERROR(InvalidRange);
MVDEPTH_DEFINE_ERROR(InvalidPose);
MVDEPTH_DEFINE_ERROR(InvalidIntrinsics);

// cost volume
MVDEPTH_DEFINE_ERROR(EmptyMeasurementSet);
MVDEPTH_DEFINE_ERROR(FrameMismatch);

// depthnet
MVDEPTH_DEFINE_ERROR(InvalidConfig);
MVDEPTH_DEFINE_ERROR(ShapeMismatch);

// augmentation
MVDEPTH_DEFINE_ERROR(InvalidFactor);

// metrics
MVDEPTH_DEFINE_ERROR(ResolutionMismatch);
MVDEPTH_DEFINE_ERROR(EmptyOverlap);

// dataset io
MVDEPTH_DEFINE_ERROR(EmptyResult);
MVDEPTH_DEFINE_ERROR(DecodeError);
MVDEPTH_DEFINE_ERROR(BitDepthError);
MVDEPTH_DEFINE_ERROR(FormatError);
MVDEPTH_DEFINE_ERROR(IoError);

#undef MVDEPTH_DEFINE_ERROR

}  // namespace mvdepth
