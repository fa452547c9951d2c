#pragma once

#include <complex>
#include <cstddef>

namespace cpr {

using cplx = std::complex<double>;

namespace kernels {

enum class Backend { scalar, avx2 };

bool avx2_available();
Backend active_backend();
// Forcing avx2 on a machine without it falls back to scalar.
void set_backend(Backend b);
const char* backend_name(Backend b);

void magnitudes(const cplx* in, double* out, std::size_t n);
double norm2_sq(const cplx* x, std::size_t n);
// max_i |x_i - rot * y_i|
double max_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
double sum_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
double sum_sq_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
cplx real_weighted_dot(const double* w, const cplx* x, std::size_t n);
// out = A x with A row-major m x n.
void dense_matvec(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* out);

namespace scalar {
void magnitudes(const cplx* in, double* out, std::size_t n);
double norm2_sq(const cplx* x, std::size_t n);
double max_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
double sum_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
double sum_sq_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
cplx real_weighted_dot(const double* w, const cplx* x, std::size_t n);
void dense_matvec(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* out);
}  // namespace scalar

namespace avx2 {
void magnitudes(const cplx* in, double* out, std::size_t n);
double norm2_sq(const cplx* x, std::size_t n);
double max_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
double sum_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
double sum_sq_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n);
cplx real_weighted_dot(const double* w, const cplx* x, std::size_t n);
void dense_matvec(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* out);
}  // namespace avx2

}  // namespace kernels
}  // namespace cpr
