#include <cmath>
#include <numbers>

#include "cpr/phase.hpp"
#include "cpr/random.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

constexpr double kPi = std::numbers::pi;
const PhaseConstants kPC{};

struct Sums {
  double ax, ay;
  std::array<std::array<double, 2>, 2> s;
};

// direct complex arithmetic: s[j][l] = |x + e^{i(2c eps j + l pi/2)} y + n1 + n3|
Sums sums(cplx x, cplx y, double eps, cplx n1 = 0, cplx n2 = 0, cplx n3 = 0) {
  Sums r;
  r.ax = std::abs(x + n1);
  r.ay = std::abs(y + n2);
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l)
      r.s[j][l] = std::abs(x + std::polar(1.0, 2 * kPC.c * eps * j + l * kPi / 2) * y + n1 + n3);
  return r;
}

}  // namespace

TEST_SUITE("phase") {
  TEST_CASE("law of cosines") {
    CHECK(law_of_cosines_angle(1, 1, std::sqrt(2.0)) == doctest::Approx(kPi / 2));
    CHECK(law_of_cosines_angle(1, 1, 2) == doctest::Approx(0.0));
    CHECK(law_of_cosines_angle(1, 1, 0) == doctest::Approx(kPi));
    CHECK(law_of_cosines_angle(3, 4, 5) == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS(law_of_cosines_angle(0, 1, 1), DegenerateMagnitude);
    // drift past the triangle inequality is clamped
    CHECK(law_of_cosines_angle(1, 1, 2 + 1e-12) == doctest::Approx(0.0));
  }

  TEST_CASE("zero noise is exact") {
    for (int t = 0; t < 360; ++t) {
      const double theta = 2 * kPi * (t + 0.5) / 360;
      const cplx x = std::polar(1.3, 0.2), y = std::polar(0.7, 0.2 + theta);
      const double eps = 0.02;
      auto sm = sums(x, y, eps);
      auto u = estimate_unsigned_phase(sm.ax, sm.ay, sm.s[0][0], eps, kPC);
      CHECK(std::abs(u.theta - circ_dist(theta, 0)) < 1e-12);
      auto f = estimate_full_phase(sm.ax, sm.ay, sm.s, eps, kPC);
      CHECK(circ_dist(f.theta, theta) < 1e-12);
      CHECK(f.branch >= 0);
      auto o = estimate_full_phase_offset(sm.s, eps, kPC);
      CHECK(circ_dist(o.theta, theta) < 1e-12);
      if (circ_dist(theta, 0) > 2 * kPC.c * eps && circ_dist(theta, kPi) > 2 * kPC.c * eps) {
        auto sg = estimate_signed_phase(sm.ax, sm.ay, sm.s[0][0], sm.s[1][0], eps, kPC);
        CHECK(circ_dist(sg.theta, theta) < 1e-9);
        CHECK_FALSE(sg.out_of_range);
      }
    }
  }

  TEST_CASE("signed orientation and the full-circle branches at 0 and pi") {
    const double eps = 0.02;
    auto a = sums(1, cplx(0, 1), eps);
    CHECK(estimate_signed_phase(a.ax, a.ay, a.s[0][0], a.s[1][0], eps, kPC).theta == doctest::Approx(kPi / 2));
    auto b = sums(1, cplx(0, -1), eps);
    CHECK(estimate_signed_phase(b.ax, b.ay, b.s[0][0], b.s[1][0], eps, kPC).theta == doctest::Approx(3 * kPi / 2));
    for (double theta : {0.0, kPi}) {
      auto s = sums(1, std::polar(1.0, theta), eps);
      auto f = estimate_full_phase(s.ax, s.ay, s.s, eps, kPC);
      CHECK(circ_dist(f.theta, theta) < 1e-12);
      CHECK(f.branch == 1);
    }
  }

  TEST_CASE("noisy estimates stay within the calibrated bounds") {
    SeededStream s(21, "phase-noise");
    for (double eps : {0.05, 0.02, 0.01}) {
      double worst = 0, worst_u = 0;
      for (std::size_t t = 0; t < 10000; ++t) {
        const double theta = 2 * kPi * s.uniform(t, 0);
        const double r = std::exp(std::log(10.0) * (2 * s.uniform(t, 1) - 1));
        const cplx x = 1.0, y = std::polar(r, theta);
        const double a = eps * std::min(1.0, r);
        const cplx n1 = std::polar(a * s.uniform(t, 2), 2 * kPi * s.uniform(t, 3));
        const cplx n2 = std::polar(a * s.uniform(t, 4), 2 * kPi * s.uniform(t, 5));
        const cplx n3 = std::polar(a * s.uniform(t, 6), 2 * kPi * s.uniform(t, 7));
        auto sm = sums(x, y, eps, n1, n2, n3);
        worst = std::max(worst, circ_dist(estimate_full_phase(sm.ax, sm.ay, sm.s, eps, kPC).theta, theta));
        const double su = std::abs(x + y + n1 + n2 + n3);
        worst_u = std::max(worst_u, std::abs(estimate_unsigned_phase(sm.ax, sm.ay, su, eps, kPC).theta -
                                             circ_dist(theta, 0)));
      }
      CHECK(worst <= kPC.c * eps);
      CHECK(worst_u <= kPC.c0 * std::sqrt(eps));
    }
  }

  TEST_CASE("acceptance windows cover the circle") {
    // windows of half width 3 c eps around both axes cover the circle iff 3 c eps < pi / 4
    for (double eps : {0.01, 0.02, 0.99 * kPi / (12 * kPC.c)}) {
      std::size_t uncovered = 0;
      for (double theta = 0; theta < 2 * kPi; theta += 1e-3) {
        auto sm = sums(1, std::polar(1.0, theta), eps);
        uncovered += estimate_full_phase(sm.ax, sm.ay, sm.s, eps, kPC).branch < 0;
      }
      CHECK(uncovered == 0);
    }
    // past that point some angles fall outside both windows, the estimate itself stays exact
    const double eps = kPi / (9 * kPC.c);
    std::size_t uncovered = 0;
    double worst = 0;
    for (double theta = 0; theta < 2 * kPi; theta += 1e-3) {
      auto sm = sums(1, std::polar(1.0, theta), eps);
      auto e = estimate_full_phase(sm.ax, sm.ay, sm.s, eps, kPC);
      uncovered += e.branch < 0;
      worst = std::max(worst, circ_dist(e.theta, theta));
    }
    CHECK(uncovered > 0);
    CHECK(worst < 1e-9);
  }

  TEST_CASE("fit over arbitrary rotations") {
    const cplx x = std::polar(2.0, 1.0), y = std::polar(0.5, 1.0 + 2.5);
    std::vector<RotatedSum> rows;
    for (double psi : {0.0, 0.3, kPi / 2, 2.0}) rows.push_back({psi, std::abs(x + std::polar(1.0, psi) * y)});
    auto e = fit_relative_phase(2.0, 0.5, rows, 0.01, kPC);
    CHECK(circ_dist(e.theta, 2.5) < 1e-12);
    std::vector<RotatedSum> real_rows = {{0.0, std::abs(x + y)}, {kPi, std::abs(x - y)}};
    auto u = fit_relative_phase(2.0, 0.5, real_rows, 0.01, kPC);
    CHECK(u.mode == PhaseMode::unsigned_angle);
    CHECK(std::abs(u.theta - circ_dist(2.5, 0)) < 1e-12);
  }

  TEST_CASE("rounding and circular median") {
    auto P = PhaseSet::equidistant_set(4);
    auto [p, d] = round_to_phase_set(1.6, P);
    CHECK(p == doctest::Approx(kPi / 2));
    CHECK(d == doctest::Approx(0.0292).epsilon(1e-3));
    CHECK(round_to_phase_set(kPi, P).first == doctest::Approx(kPi));
    CHECK(round_to_phase_set(kPi, P).second == doctest::Approx(0.0));
    CHECK(round_to_phase_set(kPi / 4, P).first == 0.0);
    CHECK(circular_median({0.1, 0.2, 6.2}) == doctest::Approx(0.1));
  }
}
