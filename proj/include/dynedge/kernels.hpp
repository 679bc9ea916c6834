#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace dynedge::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string to_string(Backend b);
std::optional<Backend> backend_from_string(const std::string& name);

/// Inner-loop primitives of the RK4 integrator. Matrices are dense,
/// column-major, n x n with leading dimension n.
struct KernelTable {
  Backend backend;
  // y = A x
  void (*matvec)(const double* A, std::size_t n, const double* x, double* y);
  // out = x + a k
  void (*stage)(std::size_t n, const double* x, double a, const double* k, double* out);
  // x += h/6 (k1 + 2 k2 + 2 k3 + k4)
  void (*rk4_combine)(std::size_t n, double h, const double* k1, const double* k2, const double* k3,
                      const double* k4, double* x);
};

const KernelTable& scalar_table();
#if defined(DYNEDGE_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(DYNEDGE_HAVE_NEON)
const KernelTable& neon_table();
#endif

/// Compiled in and supported by the running CPU.
bool available(Backend b);

/// The table used by the integrator. Chosen once from the CPU features,
/// unless DYNEDGE_KERNELS=scalar|avx2|neon or force_backend overrides it.
const KernelTable& active();

/// Pins the backend (throws ValidationError when it is not available).
void force_backend(Backend b);
/// Back to automatic selection.
void reset_backend();

}  // namespace dynedge::kernels
