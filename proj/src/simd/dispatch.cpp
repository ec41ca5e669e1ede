#include "mvdepth/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace mvdepth::simd {

namespace {

Level probe() {
#if defined(MVDEPTH_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Level::kAvx2;
#endif
  return Level::kScalar;
}

Level initial_level() {
  const Level detected = detected_level();
  if (const char* env = std::getenv("MVDEPTH_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Level::kScalar;
    if (v == "avx2" && detected >= Level::kAvx2) return Level::kAvx2;
  }
  return detected;
}

std::atomic<Level>& active() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

Level detected_level() {
  static const Level level = probe();
  return level;
}

Level active_level() { return active().load(std::memory_order_relaxed); }

Level set_active_level(Level level) {
  const Level applied = level > detected_level() ? detected_level() : level;
  active().store(applied, std::memory_order_relaxed);
  return applied;
}

std::string_view to_string(Level level) {
  switch (level) {
    case Level::kScalar:
      return "scalar";
    case Level::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace mvdepth::simd
