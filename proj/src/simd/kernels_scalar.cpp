#include <cmath>

#include "rlg/simd/kernels.hpp"

namespace rlg::simd::detail {

namespace {

void affine(const double* x, std::size_t n, std::size_t in, const double* w, const double* b, std::size_t out,
            double* y) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * in;
    double* ys = y + s * out;
    for (std::size_t j = 0; j < out; ++j) {
      const double* wj = w + j * in;
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += wj[i] * xs[i];
      ys[j] = b ? acc + b[j] : acc;
    }
  }
}

void affine_backward_input(const double* g, std::size_t n, std::size_t out, const double* w, std::size_t in,
                           double* gx) {
  for (std::size_t s = 0; s < n; ++s) {
    double* gxs = gx + s * in;
    for (std::size_t i = 0; i < in; ++i) gxs[i] = 0.0;
    const double* gs = g + s * out;
    for (std::size_t j = 0; j < out; ++j) {
      const double gj = gs[j];
      const double* wj = w + j * in;
      for (std::size_t i = 0; i < in; ++i) gxs[i] += gj * wj[i];
    }
  }
}

void accumulate_weight_grad(const double* g, std::size_t n, std::size_t out, const double* h, std::size_t in,
                            double* gw, double* gb) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* gs = g + s * out;
    const double* hs = h + s * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double gj = gs[j];
      double* gwj = gw + j * in;
      for (std::size_t i = 0; i < in; ++i) gwj[i] += gj * hs[i];
      if (gb) gb[j] += gj;
    }
  }
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double beta1,
                 double beta2, double eps, double bias_corr1, double bias_corr2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] / bias_corr1;
    const double vhat = v[i] / bias_corr2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void tanh_inplace(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{affine, affine_backward_input, accumulate_weight_grad, adam_update, axpy, tanh_inplace};
  return table;
}

}  // namespace rlg::simd::detail
