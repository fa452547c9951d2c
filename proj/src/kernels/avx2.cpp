// Compiled with -mavx2 -mfma; only reached through the dispatcher after a cpuid check.
#include "cpr/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace cpr::kernels::avx2 {

namespace {

inline const double* raw(const cplx* p) { return reinterpret_cast<const double*>(p); }

// lanes [re0, im0, re1, im1] -> rot * z for two complex values
inline __m256d rotate(__m256d z, __m256d rre, __m256d rim) {
  __m256d sw = _mm256_permute_pd(z, 0b0101);
  return _mm256_addsub_pd(_mm256_mul_pd(z, rre), _mm256_mul_pd(sw, rim));
}

// squared magnitudes of 4 complex values held in a, b, in order
inline __m256d sqmag4(__m256d a, __m256d b) {
  __m256d h = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
  return _mm256_permute4x64_pd(h, 0b11011000);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double mag(cplx z) { return std::sqrt(z.real() * z.real() + z.imag() * z.imag()); }

}  // namespace

void magnitudes(const cplx* in, double* out, std::size_t n) {
  const double* p = raw(in);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(p + 2 * i);
    __m256d b = _mm256_loadu_pd(p + 2 * i + 4);
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sqmag4(a, b)));
  }
  for (; i < n; ++i) out[i] = mag(in[i]);
}

double norm2_sq(const cplx* x, std::size_t n) {
  const double* p = raw(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d a = _mm256_loadu_pd(p + 2 * i);
    acc = _mm256_fmadd_pd(a, a, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

double max_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  const double* px = raw(x);
  const double* py = raw(y);
  __m256d rre = _mm256_set1_pd(rot.real()), rim = _mm256_set1_pd(rot.imag());
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(px + 2 * i), rotate(_mm256_loadu_pd(py + 2 * i), rre, rim));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(px + 2 * i + 4), rotate(_mm256_loadu_pd(py + 2 * i + 4), rre, rim));
    m = _mm256_max_pd(m, sqmag4(d0, d1));
  }
  double r = std::sqrt(hmax(m));
  for (; i < n; ++i) r = std::max(r, mag(x[i] - rot * y[i]));
  return r;
}

double sum_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  const double* px = raw(x);
  const double* py = raw(y);
  __m256d rre = _mm256_set1_pd(rot.real()), rim = _mm256_set1_pd(rot.imag());
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(px + 2 * i), rotate(_mm256_loadu_pd(py + 2 * i), rre, rim));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(px + 2 * i + 4), rotate(_mm256_loadu_pd(py + 2 * i + 4), rre, rim));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(sqmag4(d0, d1)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += mag(x[i] - rot * y[i]);
  return s;
}

double sum_sq_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  const double* px = raw(x);
  const double* py = raw(y);
  __m256d rre = _mm256_set1_pd(rot.real()), rim = _mm256_set1_pd(rot.imag());
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(px + 2 * i), rotate(_mm256_loadu_pd(py + 2 * i), rre, rim));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    cplx d = x[i] - rot * y[i];
    s += d.real() * d.real() + d.imag() * d.imag();
  }
  return s;
}

cplx real_weighted_dot(const double* w, const cplx* x, std::size_t n) {
  const double* px = raw(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d ww = _mm256_set_pd(w[i + 1], w[i + 1], w[i], w[i]);
    acc = _mm256_fmadd_pd(ww, _mm256_loadu_pd(px + 2 * i), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double re = lanes[0] + lanes[2], im = lanes[1] + lanes[3];
  for (; i < n; ++i) {
    re += w[i] * x[i].real();
    im += w[i] * x[i].imag();
  }
  return {re, im};
}

void dense_matvec(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* out) {
  const double* px = raw(x);
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = raw(a + r * n);
    __m256d p = _mm256_setzero_pd(), q = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
      __m256d av = _mm256_loadu_pd(row + 2 * j);
      __m256d xv = _mm256_loadu_pd(px + 2 * j);
      p = _mm256_fmadd_pd(av, xv, p);
      q = _mm256_fmadd_pd(av, _mm256_permute_pd(xv, 0b0101), q);
    }
    alignas(32) double lp[4], lq[4];
    _mm256_store_pd(lp, p);
    _mm256_store_pd(lq, q);
    double re = (lp[0] - lp[1]) + (lp[2] - lp[3]);
    double im = (lq[0] + lq[1]) + (lq[2] + lq[3]);
    for (; j < n; ++j) {
      cplx ar = a[r * n + j];
      re += ar.real() * x[j].real() - ar.imag() * x[j].imag();
      im += ar.real() * x[j].imag() + ar.imag() * x[j].real();
    }
    out[r] = {re, im};
  }
}

}  // namespace cpr::kernels::avx2
