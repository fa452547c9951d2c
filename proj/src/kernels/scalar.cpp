#include "cpr/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace cpr::kernels::scalar {

static inline double mag(cplx z) { return std::sqrt(z.real() * z.real() + z.imag() * z.imag()); }

void magnitudes(const cplx* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = mag(in[i]);
}

double norm2_sq(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

double max_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, mag(x[i] - rot * y[i]));
  return m;
}

double sum_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += mag(x[i] - rot * y[i]);
  return s;
}

double sum_sq_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cplx d = x[i] - rot * y[i];
    s += d.real() * d.real() + d.imag() * d.imag();
  }
  return s;
}

cplx real_weighted_dot(const double* w, const cplx* x, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += w[i] * x[i].real();
    im += w[i] * x[i].imag();
  }
  return {re, im};
}

void dense_matvec(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* out) {
  for (std::size_t r = 0; r < m; ++r) {
    const cplx* row = a + r * n;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      re += row[j].real() * x[j].real() - row[j].imag() * x[j].imag();
      im += row[j].real() * x[j].imag() + row[j].imag() * x[j].real();
    }
    out[r] = {re, im};
  }
}

}  // namespace cpr::kernels::scalar
