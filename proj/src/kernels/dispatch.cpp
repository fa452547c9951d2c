#include "cpr/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace cpr::kernels {

namespace {

Backend detect() {
  const char* env = std::getenv("CPR_KERNELS");
  if (env && std::strcmp(env, "scalar") == 0) return Backend::scalar;
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{detect()};
  return b;
}

inline bool use_avx2() { return current().load(std::memory_order_relaxed) == Backend::avx2; }

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return current().load(); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available()) b = Backend::scalar;
  current().store(b);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

void magnitudes(const cplx* in, double* out, std::size_t n) {
  use_avx2() ? avx2::magnitudes(in, out, n) : scalar::magnitudes(in, out, n);
}
double norm2_sq(const cplx* x, std::size_t n) {
  return use_avx2() ? avx2::norm2_sq(x, n) : scalar::norm2_sq(x, n);
}
double max_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  return use_avx2() ? avx2::max_abs_diff_rotated(x, y, rot, n) : scalar::max_abs_diff_rotated(x, y, rot, n);
}
double sum_abs_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  return use_avx2() ? avx2::sum_abs_diff_rotated(x, y, rot, n) : scalar::sum_abs_diff_rotated(x, y, rot, n);
}
double sum_sq_diff_rotated(const cplx* x, const cplx* y, cplx rot, std::size_t n) {
  return use_avx2() ? avx2::sum_sq_diff_rotated(x, y, rot, n) : scalar::sum_sq_diff_rotated(x, y, rot, n);
}
cplx real_weighted_dot(const double* w, const cplx* x, std::size_t n) {
  return use_avx2() ? avx2::real_weighted_dot(w, x, n) : scalar::real_weighted_dot(w, x, n);
}
void dense_matvec(const cplx* a, std::size_t m, std::size_t n, const cplx* x, cplx* out) {
  use_avx2() ? avx2::dense_matvec(a, m, n, x, out) : scalar::dense_matvec(a, m, n, x, out);
}

}  // namespace cpr::kernels
