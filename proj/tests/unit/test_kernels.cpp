#include <random>
#include <vector>

#include "cpr/kernels.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

std::vector<cplx> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> N(0, 1);
  std::vector<cplx> v(n);
  for (auto& z : v) z = {N(g), N(g)};
  return v;
}

// lengths around the 2-lane boundary and a long one
const std::size_t kLens[] = {0, 1, 2, 3, 4, 5, 7, 8, 17, 1000};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("avx2 matches scalar on every kernel") {
    if (!kernels::avx2_available()) {
      MESSAGE("avx2 not available, only the dispatch fallback is checked");
      kernels::set_backend(kernels::Backend::avx2);
      CHECK(kernels::active_backend() == kernels::Backend::scalar);
      return;
    }
    const cplx rot = std::polar(1.0, 0.7);
    for (std::size_t n : kLens) {
      auto x = random_vec(n, 1 + unsigned(n)), y = random_vec(n, 100 + unsigned(n));
      std::vector<double> w(n), ms(n), mv(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = x[i].real();
      kernels::scalar::magnitudes(x.data(), ms.data(), n);
      kernels::avx2::magnitudes(x.data(), mv.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(mv[i] == doctest::Approx(ms[i]).epsilon(1e-14));
      CHECK(kernels::avx2::norm2_sq(x.data(), n) == doctest::Approx(kernels::scalar::norm2_sq(x.data(), n)).epsilon(1e-13));
      CHECK(kernels::avx2::max_abs_diff_rotated(x.data(), y.data(), rot, n) ==
            doctest::Approx(kernels::scalar::max_abs_diff_rotated(x.data(), y.data(), rot, n)).epsilon(1e-13));
      CHECK(kernels::avx2::sum_abs_diff_rotated(x.data(), y.data(), rot, n) ==
            doctest::Approx(kernels::scalar::sum_abs_diff_rotated(x.data(), y.data(), rot, n)).epsilon(1e-12));
      CHECK(kernels::avx2::sum_sq_diff_rotated(x.data(), y.data(), rot, n) ==
            doctest::Approx(kernels::scalar::sum_sq_diff_rotated(x.data(), y.data(), rot, n)).epsilon(1e-12));
      const cplx a = kernels::avx2::real_weighted_dot(w.data(), y.data(), n);
      const cplx b = kernels::scalar::real_weighted_dot(w.data(), y.data(), n);
      CHECK(std::abs(a - b) <= 1e-12 * (1 + std::abs(b)));
    }
  }

  TEST_CASE("dense matvec agrees across backends and with a direct sum") {
    for (std::size_t m : {1u, 3u, 8u}) {
      for (std::size_t n : {1u, 2u, 5u, 33u}) {
        auto a = random_vec(m * n, unsigned(7 * m + n)), x = random_vec(n, unsigned(m + 3 * n));
        std::vector<cplx> s(m), v(m);
        kernels::scalar::dense_matvec(a.data(), m, n, x.data(), s.data());
        for (std::size_t r = 0; r < m; ++r) {
          cplx acc = 0;
          for (std::size_t c = 0; c < n; ++c) acc += a[r * n + c] * x[c];
          CHECK(std::abs(acc - s[r]) <= 1e-12 * (1 + std::abs(acc)));
        }
        if (kernels::avx2_available()) {
          kernels::avx2::dense_matvec(a.data(), m, n, x.data(), v.data());
          for (std::size_t r = 0; r < m; ++r) CHECK(std::abs(v[r] - s[r]) <= 1e-12 * (1 + std::abs(s[r])));
        }
      }
    }
  }

  TEST_CASE("runtime selection") {
    const auto before = kernels::active_backend();
    kernels::set_backend(kernels::Backend::scalar);
    CHECK(kernels::active_backend() == kernels::Backend::scalar);
    std::vector<cplx> x = {{3, 4}};
    double out = 0;
    kernels::magnitudes(x.data(), &out, 1);
    CHECK(out == doctest::Approx(5.0));
    kernels::set_backend(kernels::Backend::avx2);
    CHECK(kernels::active_backend() == (kernels::avx2_available() ? kernels::Backend::avx2 : kernels::Backend::scalar));
    kernels::magnitudes(x.data(), &out, 1);
    CHECK(out == doctest::Approx(5.0));
    kernels::set_backend(before);
    CHECK(std::string(kernels::backend_name(kernels::Backend::scalar)) == "scalar");
  }
}
