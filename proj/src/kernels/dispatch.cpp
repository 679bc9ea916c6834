#include "dynedge/error.hpp"
#include "dynedge/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace dynedge::kernels {

namespace {

std::atomic<const KernelTable*> g_forced{nullptr};

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar: return &scalar_table();
#if defined(DYNEDGE_HAVE_AVX2)
    case Backend::Avx2: return &avx2_table();
#endif
#if defined(DYNEDGE_HAVE_NEON)
    case Backend::Neon: return &neon_table();
#endif
    default: return nullptr;
  }
}

const KernelTable& detect() {
  if (const char* env = std::getenv("DYNEDGE_KERNELS")) {
    if (auto b = backend_from_string(env); b && available(*b)) return *table_for(*b);
  }
  if (available(Backend::Avx2)) return *table_for(Backend::Avx2);
  if (available(Backend::Neon)) return *table_for(Backend::Neon);
  return scalar_table();
}

}  // namespace

std::string to_string(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

std::optional<Backend> backend_from_string(const std::string& name) {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  return std::nullopt;
}

bool available(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(DYNEDGE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(DYNEDGE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& active() {
  if (const KernelTable* f = g_forced.load()) return *f;
  static const KernelTable& chosen = detect();
  return chosen;
}

void force_backend(Backend b) {
  if (!available(b)) fail(ErrorCode::ValidationError, "kernel backend " + to_string(b) + " is not available");
  g_forced.store(table_for(b));
}

void reset_backend() { g_forced.store(nullptr); }

}  // namespace dynedge::kernels
