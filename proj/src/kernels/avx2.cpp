#include "dynedge/kernels.hpp"

#include <immintrin.h>

// Same operation order as the scalar kernels and no FMA contraction, so
// both backends produce bit-identical results.

namespace dynedge::kernels {

namespace {

__attribute__((target("avx2"))) void matvec(const double* A, std::size_t n, const double* x, double* y) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* col = A + j * n;
    const __m256d xj = _mm256_set1_pd(x[j]);
    std::size_t i = 0;
    for (; i < n4; i += 4) {
      const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(col + i), xj);
      _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
    }
    for (; i < n; ++i) y[i] += col[i] * x[j];
  }
}

__attribute__((target("avx2"))) void stage(std::size_t n, const double* x, double a, const double* k, double* out) {
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(va, _mm256_loadu_pd(k + i))));
  for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

__attribute__((target("avx2"))) void rk4_combine(std::size_t n, double h, const double* k1, const double* k2,
                                                 const double* k3, const double* k4, double* x) {
  const double c = h / 6.0;
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i < n4; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, _mm256_loadu_pd(k2 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(two, _mm256_loadu_pd(k3 + i)));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(x + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(vc, s)));
  }
  for (; i < n; ++i) x[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{Backend::Avx2, matvec, stage, rk4_combine};
  return t;
}

}  // namespace dynedge::kernels
