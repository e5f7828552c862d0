#include <cmath>
#include <vector>

#include "ancon/rng.hpp"
#include "ancon/simd.hpp"
#include "doctest.h"

using namespace ancon;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2, 2);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("scalar kernels on a hand-sized example") {
  const auto& k = simd::scalar_kernels();
  const double a[6] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  const double x[3] = {1, 0, -1};
  const double y2[2] = {2, -1};
  CHECK(k.dot(a, x, 3) == -2.0);
  double y[2] = {10, 20};
  k.gemv(a, 2, 3, x, y);
  CHECK(y[0] == 8.0);
  CHECK(y[1] == 18.0);
  double t[3] = {0, 0, 0};
  k.gemv_t(a, 2, 3, y2, t);
  CHECK(t[0] == -2.0);
  CHECK(t[1] == -1.0);
  CHECK(t[2] == 0.0);
  double m[6] = {};
  k.ger(m, 2, 3, y2, x);
  CHECK(m[0] == 2.0);
  CHECK(m[2] == -2.0);
  CHECK(m[5] == 1.0);
  double z[3] = {1, 1, 1};
  k.axpy(2.0, x, z, 3);
  CHECK(z[0] == 3.0);
  CHECK(z[2] == -1.0);
}

TEST_CASE("every available backend matches the scalar reference") {
  Rng rng(3);
  const auto& ref = simd::scalar_kernels();
  for (auto backend : {simd::Backend::scalar, simd::Backend::avx2, simd::Backend::neon}) {
    if (!simd::available(backend)) continue;
    CAPTURE(simd::name(backend));
    const auto& k = simd::kernels(backend);
    for (std::size_t rows : {1u, 3u, 4u, 7u, 33u})
      for (std::size_t cols : {1u, 2u, 5u, 8u, 17u, 64u}) {
        const auto a = random_vec(rng, rows * cols);
        const auto x = random_vec(rng, cols);
        const auto xr = random_vec(rng, rows);
        CHECK(std::abs(k.dot(a.data(), x.data(), cols) - ref.dot(a.data(), x.data(), cols)) < 1e-12);

        auto y1 = random_vec(rng, rows), y2 = y1;
        k.gemv(a.data(), rows, cols, x.data(), y1.data());
        ref.gemv(a.data(), rows, cols, x.data(), y2.data());
        CHECK(max_diff(y1, y2) < 1e-12);

        auto t1 = random_vec(rng, cols), t2 = t1;
        k.gemv_t(a.data(), rows, cols, xr.data(), t1.data());
        ref.gemv_t(a.data(), rows, cols, xr.data(), t2.data());
        CHECK(max_diff(t1, t2) < 1e-12);

        auto m1 = a, m2 = a;
        k.ger(m1.data(), rows, cols, xr.data(), x.data());
        ref.ger(m2.data(), rows, cols, xr.data(), x.data());
        CHECK(max_diff(m1, m2) < 1e-12);

        auto s1 = x, s2 = x;
        k.axpy(0.37, a.data(), s1.data(), cols);
        ref.axpy(0.37, a.data(), s2.data(), cols);
        CHECK(max_diff(s1, s2) < 1e-12);
      }
  }
}

TEST_CASE("backend selection") {
  const auto before = simd::active_backend();
  CHECK(simd::available(simd::Backend::scalar));
  simd::select(simd::Backend::scalar);
  CHECK(simd::active_backend() == simd::Backend::scalar);
  simd::select(before);
  CHECK(simd::parse_backend("scalar") == simd::Backend::scalar);
  CHECK_THROWS(simd::parse_backend("sse9"));
}
