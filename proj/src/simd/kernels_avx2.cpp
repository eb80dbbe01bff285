#include <immintrin.h>

#include <cmath>

#include "rlg/simd/kernels.hpp"

namespace rlg::simd::detail {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void affine(const double* x, std::size_t n, std::size_t in, const double* w, const double* b, std::size_t out,
            double* y) {
  const std::size_t in4 = in & ~std::size_t{3};
  for (std::size_t s = 0; s < n; ++s) {
    const double* xs = x + s * in;
    double* ys = y + s * out;
    std::size_t j = 0;
    // Four output rows share each load of the input vector.
    for (; j + 4 <= out; j += 4) {
      const double* w0 = w + j * in;
      const double* w1 = w0 + in;
      const double* w2 = w1 + in;
      const double* w3 = w2 + in;
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      for (std::size_t i = 0; i < in4; i += 4) {
        const __m256d xv = _mm256_loadu_pd(xs + i);
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + i), xv, a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + i), xv, a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + i), xv, a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + i), xv, a3);
      }
      double r0 = hsum(a0), r1 = hsum(a1), r2 = hsum(a2), r3 = hsum(a3);
      for (std::size_t i = in4; i < in; ++i) {
        r0 += w0[i] * xs[i];
        r1 += w1[i] * xs[i];
        r2 += w2[i] * xs[i];
        r3 += w3[i] * xs[i];
      }
      if (b) {
        r0 += b[j];
        r1 += b[j + 1];
        r2 += b[j + 2];
        r3 += b[j + 3];
      }
      ys[j] = r0;
      ys[j + 1] = r1;
      ys[j + 2] = r2;
      ys[j + 3] = r3;
    }
    for (; j < out; ++j) {
      const double r = dot(w + j * in, xs, in);
      ys[j] = b ? r + b[j] : r;
    }
  }
}

inline void axpy_impl(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void affine_backward_input(const double* g, std::size_t n, std::size_t out, const double* w, std::size_t in,
                           double* gx) {
  for (std::size_t s = 0; s < n; ++s) {
    double* gxs = gx + s * in;
    for (std::size_t i = 0; i < in; ++i) gxs[i] = 0.0;
    const double* gs = g + s * out;
    for (std::size_t j = 0; j < out; ++j) axpy_impl(gs[j], w + j * in, gxs, in);
  }
}

void accumulate_weight_grad(const double* g, std::size_t n, std::size_t out, const double* h, std::size_t in,
                            double* gw, double* gb) {
  for (std::size_t s = 0; s < n; ++s) {
    const double* gs = g + s * out;
    const double* hs = h + s * in;
    for (std::size_t j = 0; j < out; ++j) {
      axpy_impl(gs[j], hs, gw + j * in, in);
      if (gb) gb[j] += gs[j];
    }
  }
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double beta1,
                 double beta2, double eps, double bias_corr1, double bias_corr2) {
  const __m256d b1 = _mm256_set1_pd(beta1), c1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d b2 = _mm256_set1_pd(beta2), c2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d bc1 = _mm256_set1_pd(bias_corr1), bc2 = _mm256_set1_pd(bias_corr2);
  const __m256d lrv = _mm256_set1_pd(lr), epsv = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(c1, gv));
    const __m256d vv =
        _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(c2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d mhat = _mm256_div_pd(mv, bc1);
    const __m256d vhat = _mm256_div_pd(vv, bc2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    p[i] -= lr * (m[i] / bias_corr1) / (std::sqrt(v[i] / bias_corr2) + eps);
  }
}

// tanh(x) = e / (e + 2) with e = expm1(2|x|), sign restored afterwards.
// expm1(y) = 2^k expm1(r) + (2^k - 1) with y = k ln2 + r, |r| <= ln2 / 2,
// and expm1(r) from its degree-13 Taylor polynomial.
inline __m256d tanh_pd(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d sign = _mm256_and_pd(x, sign_mask);
  __m256d y = _mm256_add_pd(_mm256_andnot_pd(sign_mask, x), _mm256_andnot_pd(sign_mask, x));
  y = _mm256_min_pd(y, _mm256_set1_pd(40.0));
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(y, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93147180369123816490e-01), y);
  r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.90821492927058770002e-10), r);
  static constexpr double inv_fact[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
                                        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
                                        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5};
  __m256d p = _mm256_set1_pd(inv_fact[0]);
  for (std::size_t i = 1; i < 12; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(inv_fact[i]));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_mul_pd(p, r);  // expm1(r)
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);
  const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
  const __m256d two_k = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52));
  const __m256d e = _mm256_fmadd_pd(two_k, p, _mm256_sub_pd(two_k, _mm256_set1_pd(1.0)));
  const __m256d t = _mm256_div_pd(e, _mm256_add_pd(e, _mm256_set1_pd(2.0)));
  return _mm256_or_pd(t, sign);
}

void tanh_inplace(double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, tanh_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = std::tanh(x[i]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{affine, affine_backward_input, accumulate_weight_grad, adam_update, axpy_impl, tanh_inplace};
  return table;
}

}  // namespace rlg::simd::detail
