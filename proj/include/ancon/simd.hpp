#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision kernels used by the recurrent network. Each backend
// provides the same table of functions; the scalar one is the reference and
// the vector backends are tested against it.

namespace ancon::simd {

enum class Backend { scalar, avx2, neon };

struct Kernels {
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += A^T x
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // A += x y^T
  void (*ger)(double* a, std::size_t rows, std::size_t cols, const double* x, const double* y);
};

const Kernels& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
#endif
#if defined(__aarch64__)
const Kernels& neon_kernels();
#endif

bool available(Backend b);
/// Kernel table for a backend; throws InvalidArgument when the CPU lacks it.
const Kernels& kernels(Backend b);

/// Best supported backend, unless ANCON_SIMD=scalar|avx2|neon overrides it.
Backend detect();
Backend active_backend();
const Kernels& active();
/// Process-wide switch; not meant to be flipped while other threads compute.
void select(Backend b);

std::string_view name(Backend b);
Backend parse_backend(std::string_view text);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace ancon::simd
