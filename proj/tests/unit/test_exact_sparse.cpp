#include <algorithm>
#include <cmath>
#include <numbers>

#include "cpr/exact_sparse.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

constexpr double kPi = std::numbers::pi;

// min over theta of max |z - e^{i theta} zhat| on the union of supports
double up_to_phase(std::size_t n, const std::vector<Index>& s, const std::vector<cplx>& v, const BucketSolution& b) {
  SparseApprox a = SparseApprox::from_pairs(n, [&] {
    std::vector<std::pair<Index, cplx>> p;
    for (std::size_t j = 0; j < s.size(); ++j) p.push_back({s[j], v[j]});
    return p;
  }());
  SparseApprox h = SparseApprox::from_pairs(n, [&] {
    std::vector<std::pair<Index, cplx>> p;
    for (std::size_t j = 0; j < b.support.size(); ++j) p.push_back({b.support[j], b.values[j]});
    return p;
  }());
  return phase_error(a.to_dense(), h, ErrorNorm::linf);
}

BucketProblem problem(const OmegaTable& w, std::size_t n, std::size_t K, const std::vector<cplx>& gamma,
                      const std::vector<Index>& s, const std::vector<cplx>& v) {
  const std::size_t M = std::min(2 * K, n);
  auto rows = bucket_forward(w, M, gamma, s, v);
  BucketProblem p;
  p.n = n;
  p.M = M;
  p.K = K;
  p.singles = rows.singles;
  p.prefix = rows.prefix;
  p.companions = rows.companions;
  p.gamma = gamma;
  return p;
}

GeneratedSignal sparse_signal(std::size_t n, std::size_t k, std::uint64_t seed) {
  SignalSpec sp;
  sp.n = n;
  sp.k = k;
  sp.lo = 1;
  sp.hi = 10;
  sp.phase_set = PhaseSet::equidistant_set(4096);
  sp.seed = seed;
  return generate(sp);
}

}  // namespace

TEST_SUITE("exact_sparse") {
  TEST_CASE("bucket solver: zero and single spikes") {
    const std::size_t n = 1024;
    OmegaTable w(n);
    auto z = solve_bucket(problem(w, n, 4, {}, {}, {}), w);
    CHECK(z.ok);
    CHECK(z.support.empty());
    SeededStream s(2, "spike");
    for (std::size_t t = 0; t < 50; ++t) {
      const Index p = s.below(n, t);
      const cplx v = std::polar(0.5 + 3 * s.uniform(t, 1), 2 * kPi * s.uniform(t, 2));
      auto pr = problem(w, n, 4, {}, {p}, {v});
      for (double f : pr.singles) CHECK(f == doctest::Approx(std::abs(v)));
      auto r = solve_bucket(pr, w);
      REQUIRE(r.ok);
      CHECK(r.support == std::vector<Index>{p});
      CHECK(up_to_phase(n, {p}, {v}, r) < 1e-9);
    }
  }

  TEST_CASE("bucket solver: random 3-sparse at K = 8") {
    const std::size_t n = 4096;
    OmegaTable w(n);
    std::size_t ok = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      SeededStream s(seed, "three");
      auto sup = sample_without_replacement(s, n, 3);
      std::sort(sup.begin(), sup.end());
      std::vector<cplx> v;
      for (std::size_t j = 0; j < 3; ++j) v.push_back(std::polar(1 + 9 * s.uniform(j, 1), 2 * kPi * s.uniform(j, 2)));
      std::vector<cplx> gamma;
      if (seed % 2)
        for (std::size_t m = 0; m < 16; ++m) gamma.push_back(std::polar(1.0, 2 * kPi * s.uniform(m, 9)));
      auto r = solve_bucket(problem(w, n, 8, gamma, sup, v), w);
      ok += r.ok && up_to_phase(n, sup, v, r) < 1e-9;
    }
    CHECK(ok == 500);
  }

  TEST_CASE("bucket solver: equal magnitudes in one bucket") {
    const std::size_t n = 512;
    OmegaTable w(n);
    std::vector<Index> sup = {10, 300};
    std::vector<cplx> v = {2.0, std::polar(2.0, 1.0)};
    std::vector<cplx> gamma(8);
    for (std::size_t m = 0; m < 8; ++m) gamma[m] = std::polar(1.0, 0.37 * double(m * m));
    auto r = solve_bucket(problem(w, n, 4, gamma, sup, v), w);
    REQUIRE(r.ok);
    CHECK(up_to_phase(n, sup, v, r) < 1e-9);
  }

  TEST_CASE("bucket solver rejects overflow") {
    const std::size_t n = 1024;
    OmegaTable w(n);
    SeededStream s(4, "over");
    auto sup = sample_without_replacement(s, n, 9);
    std::sort(sup.begin(), sup.end());
    std::vector<cplx> v(9, 1.0);
    for (std::size_t j = 0; j < 9; ++j) v[j] = std::polar(1.0 + j, 0.3 * j);
    auto r = solve_bucket(problem(w, n, 3, {}, sup, v), w);
    CHECK_FALSE(r.ok);
  }

  TEST_CASE("two-hit rows match a brute-force recount") {
    MaskedLayerParams p;
    p.name = "f";
    p.n = 300;
    p.groups = 400;
    p.rate = 0.02;
    p.seed = 5;
    MaskedLayer L(p);
    CHECK(count_two_hit_rows(L, {}).empty());
    std::vector<Index> supp = {3, 50, 77, 120, 299};
    auto J = count_two_hit_rows(L, supp);
    std::vector<TwoHitRow> brute;
    for (std::uint64_t q = 0; q < p.groups; ++q) {
      std::vector<Index> hit;
      for (Index i : supp)
        if (L.entry(L.row_of(0, q, 0), i) != cplx{}) hit.push_back(i);
      if (hit.size() == 2) brute.push_back({q, hit[0], hit[1]});
    }
    REQUIRE(J.size() == brute.size());
    for (std::size_t j = 0; j < J.size(); ++j) {
      CHECK(J[j].q == brute[j].q);
      CHECK(J[j].u == brute[j].u);
      CHECK(J[j].v == brute[j].v);
    }
  }

  TEST_CASE("noiseless decode") {
    const Constants c = Constants::defaults();
    {
      NoiselessEnsemble ens({1024, 1, -1.0, true, true, 3, "nl"}, c);
      auto g = sparse_signal(1024, 1, 9);
      auto r = noiseless_decode(ens.measure(g.x), ens);
      CHECK(r.diag.ok);
      CHECK(phase_error(g.x, r.xhat, ErrorNorm::l2) < 1e-9);
    }
    {
      NoiselessEnsemble ens({1024, 8, -1.0, true, true, 4, "nl"}, c);
      auto r = noiseless_decode(ens.measure(ComplexSignal(1024)), ens);
      CHECK(r.xhat.size() == 0);
    }
    std::size_t ok = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
      NoiselessEnsemble ens({2048, 16, -1.0, true, true, 100 + t, "nl"}, c);
      auto g = sparse_signal(2048, 16, 200 + t);
      auto r = noiseless_decode(ens.measure(g.x), ens);
      ok += phase_error(g.x, r.xhat, ErrorNorm::l2) <= 1e-9 * tail_norm(g.x, 0, 2);
    }
    CHECK(ok >= 49);
  }

  TEST_CASE("canonical rotation") {
    auto x = SparseApprox::from_pairs(8, {{1, cplx(0, 2)}, {4, cplx(-1, 0)}});
    canonicalize(x);
    CHECK(x.values[0] == cplx(2, 0));
    CHECK(std::abs(x.values[1] - cplx(0, 1)) < 1e-15);
  }
}
