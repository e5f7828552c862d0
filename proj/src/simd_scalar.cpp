#include "ancon/simd.hpp"

namespace ancon::simd {

namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] += dot(a + r * cols, x, cols);
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r)
    if (x[r] != 0.0) axpy(x[r], a + r * cols, y, cols);
}

void ger(double* a, std::size_t rows, std::size_t cols, const double* x, const double* y) {
  for (std::size_t r = 0; r < rows; ++r)
    if (x[r] != 0.0) axpy(x[r], y, a + r * cols, cols);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", dot, axpy, gemv, gemv_t, ger};
  return k;
}

}  // namespace ancon::simd
