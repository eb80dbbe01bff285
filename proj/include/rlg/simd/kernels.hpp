#pragma once

#include <cstddef>
#include <string_view>

// Dense kernels behind the MLP and optimizer. Every kernel has a scalar
// reference implementation; vector variants are selected at runtime and are
// required to agree with the reference to rounding (see tests/unit/simd_test).
namespace rlg::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  // y[n x out] = x[n x in] * w^T + b, w row-major [out x in]; b may be null.
  void (*affine)(const double* x, std::size_t n, std::size_t in, const double* w, const double* b, std::size_t out,
                 double* y);
  // gx[n x in] = g[n x out] * w.
  void (*affine_backward_input)(const double* g, std::size_t n, std::size_t out, const double* w, std::size_t in,
                                double* gx);
  // gw[out x in] += g^T * h; gb[out] += column sums of g (gb may be null).
  void (*accumulate_weight_grad)(const double* g, std::size_t n, std::size_t out, const double* h, std::size_t in,
                                 double* gw, double* gb);
  // Bias-corrected Adam step over n contiguous parameters.
  void (*adam_update)(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double beta1,
                      double beta2, double eps, double bias_corr1, double bias_corr2);
  // y += a * x.
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] = tanh(x[i]).
  void (*tanh_inplace)(double* x, std::size_t n);
};

std::string_view to_string(Backend b);
bool backend_supported(Backend b);

// Active table; defaults to the best supported backend unless RLG_SIMD=scalar.
const KernelTable& kernels();
const KernelTable& kernels(Backend b);
Backend active_backend();
// Throws rlg::Error(Unsupported) when the CPU or build lacks the backend.
void set_backend(Backend b);

namespace detail {
const KernelTable& scalar_table();
#if defined(RLG_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace rlg::simd
