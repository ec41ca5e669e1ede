#pragma once

#include <string_view>

namespace mvdepth::simd {

/// Instruction-set tiers with hand-written kernels. Every kernel has a
/// scalar reference; higher tiers must agree with it (see the kernel
/// equivalence tests).
enum class Level { kScalar = 0, kAvx2 = 1 };

/// Highest tier both compiled in and supported by the running CPU.
Level detected_level();

/// Tier used by the dispatching entry points. Defaults to detected_level(),
/// or to the tier named by the MVDEPTH_SIMD environment variable
/// ("scalar" or "avx2") when set.
Level active_level();

/// Requests `level`; clamped to detected_level(). Returns the tier applied.
Level set_active_level(Level level);

std::string_view to_string(Level level);

/// Restores the previous tier on destruction.
class ScopedLevel {
 public:
  explicit ScopedLevel(Level level) : previous_(active_level()) { set_active_level(level); }
  ~ScopedLevel() { set_active_level(previous_); }
  ScopedLevel(const ScopedLevel&) = delete;
  ScopedLevel& operator=(const ScopedLevel&) = delete;

 private:
  Level previous_;
};

}  // namespace mvdepth::simd
