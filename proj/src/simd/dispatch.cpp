#include <atomic>
#include <cstdlib>
#include <cstring>

#include "rlg/error.hpp"
#include "rlg/simd/kernels.hpp"

namespace rlg::simd {

namespace {

bool cpu_has_avx2() {
#if defined(RLG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("RLG_SIMD"); env && std::strcmp(env, "scalar") == 0) return Backend::Scalar;
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& active() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

std::string_view to_string(Backend b) { return b == Backend::Scalar ? "scalar" : "avx2"; }

bool backend_supported(Backend b) { return b == Backend::Scalar || cpu_has_avx2(); }

const KernelTable& kernels(Backend b) {
#if defined(RLG_HAVE_AVX2)
  if (b == Backend::Avx2) return detail::avx2_table();
#else
  (void)b;
#endif
  return detail::scalar_table();
}

const KernelTable& kernels() { return kernels(active().load(std::memory_order_relaxed)); }

Backend active_backend() { return active().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (!backend_supported(b)) throw Error(ErrorCode::Unsupported, "kernel backend " + std::string(to_string(b)));
  active().store(b, std::memory_order_relaxed);
}

}  // namespace rlg::simd
