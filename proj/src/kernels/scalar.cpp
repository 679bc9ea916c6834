#include "dynedge/kernels.hpp"

namespace dynedge::kernels {

namespace {

void matvec(const double* A, std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = x[j];
    const double* col = A + j * n;
    for (std::size_t i = 0; i < n; ++i) y[i] += col[i] * xj;
  }
}

void stage(std::size_t n, const double* x, double a, const double* k, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

void rk4_combine(std::size_t n, double h, const double* k1, const double* k2, const double* k3, const double* k4,
                 double* x) {
  const double c = h / 6.0;
  for (std::size_t i = 0; i < n; ++i) x[i] += c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Backend::Scalar, matvec, stage, rk4_combine};
  return t;
}

}  // namespace dynedge::kernels
