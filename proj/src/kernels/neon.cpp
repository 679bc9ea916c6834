#include "dynedge/kernels.hpp"

#include <arm_neon.h>

namespace dynedge::kernels {

namespace {

void matvec(const double* A, std::size_t n, const double* x, double* y) {
  const std::size_t n2 = n & ~std::size_t{1};
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* col = A + j * n;
    const float64x2_t xj = vdupq_n_f64(x[j]);
    std::size_t i = 0;
    for (; i < n2; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(vld1q_f64(col + i), xj)));
    for (; i < n; ++i) y[i] += col[i] * x[j];
  }
}

void stage(std::size_t n, const double* x, double a, const double* k, double* out) {
  const std::size_t n2 = n & ~std::size_t{1};
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i < n2; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(va, vld1q_f64(k + i))));
  for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine(std::size_t n, double h, const double* k1, const double* k2, const double* k3, const double* k4,
                 double* x) {
  const double c = h / 6.0;
  const std::size_t n2 = n & ~std::size_t{1};
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i < n2; i += 2) {
    float64x2_t s = vaddq_f64(vld1q_f64(k1 + i), vmulq_f64(two, vld1q_f64(k2 + i)));
    s = vaddq_f64(s, vmulq_f64(two, vld1q_f64(k3 + i)));
    s = vaddq_f64(s, vld1q_f64(k4 + i));
    vst1q_f64(x + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(vc, s)));
  }
  for (; i < n; ++i) x[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Backend::Neon, matvec, stage, rk4_combine};
  return t;
}

}  // namespace dynedge::kernels
