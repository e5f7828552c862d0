#include <atomic>
#include <cstdlib>
#include <string>

#include "ancon/error.hpp"
#include "ancon/simd.hpp"

namespace ancon::simd {

bool available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels(Backend b) {
  if (!available(b)) throw InvalidArgument("SIMD backend not supported on this CPU: " + std::string(name(b)));
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::avx2:
      return avx2_kernels();
#endif
#if defined(__aarch64__)
    case Backend::neon:
      return neon_kernels();
#endif
    default:
      return scalar_kernels();
  }
}

std::string_view name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view text) {
  if (text == "scalar") return Backend::scalar;
  if (text == "avx2") return Backend::avx2;
  if (text == "neon") return Backend::neon;
  throw InvalidArgument("unknown SIMD backend: " + std::string(text));
}

Backend detect() {
  if (const char* env = std::getenv("ANCON_SIMD"); env && *env && std::string_view(env) != "auto") {
    const Backend forced = parse_backend(env);
    if (available(forced)) return forced;
  }
  if (available(Backend::avx2)) return Backend::avx2;
  if (available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

namespace {

struct State {
  std::atomic<Backend> backend{detect()};
  std::atomic<const Kernels*> table{&kernels(backend.load())};
};

State& state() {
  static State s;
  return s;
}

}  // namespace

Backend active_backend() { return state().backend.load(std::memory_order_relaxed); }

const Kernels& active() { return *state().table.load(std::memory_order_relaxed); }

void select(Backend b) {
  const Kernels& k = kernels(b);
  state().backend.store(b);
  state().table.store(&k);
}

}  // namespace ancon::simd
