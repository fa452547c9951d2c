#include <algorithm>
#include <cmath>
#include <set>

#include "cpr/oracle.hpp"
#include "cpr/sketches.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

ComplexSignal spike(std::size_t n, Index j, cplx v) {
  ComplexSignal x(n);
  x.values[j] = v;
  return x;
}

GeneratedSignal planted(std::size_t n, std::size_t k, double lo, double hi, double sigma, std::uint64_t seed) {
  SignalSpec s;
  s.n = n;
  s.k = k;
  s.lo = lo;
  s.hi = hi;
  s.tail_model = sigma > 0 ? TailModel::gaussian : TailModel::zero;
  s.tail_sigma = sigma;
  s.phase_set = PhaseSet::equidistant_set(4096);
  s.seed = seed;
  return generate(s);
}

ComplexSignal power_law(std::size_t n, double alpha, std::uint64_t seed) {
  SignalSpec s;
  s.n = n;
  s.tail_model = TailModel::power_law;
  s.tail_alpha = alpha;
  s.tail_scale = 1.0;
  s.tail_phase = TailPhase::phase_set;
  s.phase_set = PhaseSet::from_list({0.0});
  s.seed = seed;
  return generate(s).x;
}

}  // namespace

TEST_SUITE("sketches") {
  TEST_CASE("count sketch on a spike and on zero") {
    CountSketch cs(256, 8, 5, 6.0, 3);
    auto y = cs_measure(cs, spike(256, 17, 5.0));
    const auto& h = cs.hashed();
    for (std::uint64_t r = 0; r < cs.reps(); ++r)
      for (std::uint64_t b = 0; b < cs.buckets(); ++b)
        CHECK(y.values[r * cs.buckets() + b] == doctest::Approx(b == h.bucket(r, 17) ? 5.0 : 0.0));
    CHECK(cs_point_query(y, cs, 17) == doctest::Approx(5.0));
    auto z = cs_measure(cs, ComplexSignal(256));
    for (double v : z.values) CHECK(v == 0.0);
    CHECK(cs_point_query(z, cs, 3) == 0.0);
    CHECK(cs.buckets() >= 2 * cs.K());
    CHECK(cs.reps() % 2 == 1);
  }

  TEST_CASE("count sketch matches the dense oracle") {
    CountSketch cs(128, 4, cs_default_reps(128, SketchConstants{}), 6.0, 9);
    auto x = planted(128, 4, 3, 6, 0.5, 2).x;
    auto y = cs_measure(cs, x);
    auto yd = oracle::materialize(cs.stack()).measure(x);
    for (std::size_t r = 0; r < yd.size(); ++r) CHECK(std::abs(y.values[r] - yd[r]) < 1e-12);
  }

  TEST_CASE("heavy hitters recover an exactly sparse support") {
    const std::size_t n = 4096, K = 16;
    std::size_t ok = 0, cap_ok = 0;
    for (std::uint64_t t = 0; t < 200; ++t) {
      HeavyHitters hh(n, K, SketchConstants{}, 100 + t);
      auto g = planted(n, K, 1, 10, 0, 500 + t);
      auto S = hh_identify(hh_measure(hh, g.x), hh);
      std::set<Index> s(S.begin(), S.end());
      ok += std::all_of(g.support.begin(), g.support.end(), [&](Index i) { return s.count(i) > 0; });
      cap_ok += S.size() <= hh.cap();
    }
    CHECK(ok == 200);
    CHECK(cap_ok == 200);
  }

  TEST_CASE("heavy hitters recall with a tail 10x below the heads") {
    const std::size_t n = 4096, K = 16;
    std::size_t found = 0, total = 0;
    for (std::uint64_t t = 0; t < 200; ++t) {
      HeavyHitters hh(n, K, SketchConstants{}, 900 + t);
      auto g = planted(n, K, 10, 20, 1.0, 1500 + t);
      auto S = hh_identify(hh_measure(hh, g.x), hh);
      std::set<Index> s(S.begin(), S.end());
      for (auto i : head_indices(g.x, K)) found += s.count(i);
      total += K;
    }
    CHECK(double(found) / double(total) >= 0.99);
  }

  TEST_CASE("count-min identification") {
    const std::uint64_t n = 1024;
    CountMin cm(n, 0, 10, 4, 0.5, SketchConstants{}, 7, "cm");
    LayerStack st;
    st.add(cm.layer());
    auto y = st.measure(spike(n, 333, 2.0));
    std::vector<std::uint64_t> all(n);
    for (std::uint64_t i = 0; i < n; ++i) all[i] = i;
    auto S = cm_identify(y.layer("cm"), cm, all);
    CHECK(std::find(S.begin(), S.end(), 333u) != S.end());
    CHECK(cm_identify(y.layer("cm"), cm, {}).empty());
    ComplexSignal neg = spike(n, 5, -1.0);
    CHECK_THROWS_AS(require_nonnegative(neg), ContractViolation);
  }

  TEST_CASE("count-min recall of the l1 heavy hitters on power-law signals") {
    const std::uint64_t n = 4096, k = 16;
    const double eps = 0.25;
    std::size_t miss = 0;
    for (std::uint64_t t = 0; t < 200; ++t) {
      CountMin cm(n, 0, 12, k, eps, SketchConstants{}, 40 + t, "cm");
      LayerStack st;
      st.add(cm.layer());
      auto x = power_law(n, 1.2, 77 + t);
      auto y = st.measure(x);
      std::vector<std::uint64_t> all(n);
      for (std::uint64_t i = 0; i < n; ++i) all[i] = i;
      auto S = cm_identify(y.layer("cm"), cm, all);
      CHECK(S.size() <= cm.cap());
      std::set<std::uint64_t> s(S.begin(), S.end());
      // H_{k,eps}: |x_i| >= (eps / k) ||x_{-k}||_1
      const double thr = eps / double(k) * tail_norm(x, k, 1);
      for (std::uint64_t i = 0; i < n; ++i)
        if (std::abs(x[i]) >= thr && !s.count(i)) ++miss;
    }
    CHECK(miss == 0);
  }

  TEST_CASE("helpers") {
    CHECK(ceil_log2(1) == 0);
    CHECK(ceil_log2(2) == 1);
    CHECK(ceil_log2(5) == 3);
    CHECK(log2_or_one(1.5) == 1.0);
    CHECK(log2_or_one(8) == 3.0);
  }
}
