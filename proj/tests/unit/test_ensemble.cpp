#include <cmath>
#include <set>

#include "cpr/ensemble.hpp"
#include "cpr/oracle.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

ComplexSignal random_signal(std::size_t n, std::uint64_t seed) {
  SeededStream s(seed, "ens-signal");
  ComplexSignal x(n);
  for (std::size_t i = 0; i < n; ++i) x.values[i] = {s.gaussian(i, 0), s.gaussian(i, 1)};
  return x;
}

// every column entry agrees with entry(), and entry() is zero off the listed rows
void check_column_entry(const Layer& L) {
  std::vector<ColumnEntry> col;
  for (std::uint64_t i = 0; i < L.cols(); ++i) {
    col.clear();
    L.column(i, col);
    std::set<std::uint64_t> rows;
    for (const auto& e : col) {
      CHECK(e.row < L.rows());
      CHECK(std::abs(L.entry(e.row, i) - e.w) < 1e-14);
      rows.insert(e.row);
    }
    for (std::uint64_t r = 0; r < L.rows(); ++r)
      if (!rows.count(r)) CHECK(L.entry(r, i) == cplx{});
  }
}

}  // namespace

TEST_SUITE("ensemble") {
  TEST_CASE("hashed layer: column and entry paths agree") {
    for (auto w : {WeightKind::one, WeightKind::sign, WeightKind::gaussian, WeightKind::phase}) {
      HashedLayerParams p;
      p.name = "h";
      p.n = 37;
      p.reps = 3;
      p.buckets = 5;
      p.weight = w;
      p.seed = 4;
      HashedLayer L(p);
      CHECK(L.rows() == 15);
      check_column_entry(L);
    }
    HashedLayerParams q;
    q.name = "id";
    q.n = 64;
    q.shift = 3;
    q.buckets = 8;
    q.weight = WeightKind::one;
    HashedLayer id(q);
    CHECK(id.identity());
    for (std::uint64_t i = 0; i < 64; ++i) CHECK(id.bucket(0, i) == (i >> 3));
  }

  TEST_CASE("masked layer: every row kind") {
    MaskedLayerParams p;
    p.name = "m";
    p.n = 29;
    p.groups = 6;
    p.rate = 0.3;
    p.pattern = {RowKind::one,     RowKind::sign,     RowKind::gaussian, RowKind::xi_gauss,
                 RowKind::sub,     RowKind::sub_tau,  RowKind::one_tau,  RowKind::sign_tau};
    p.sub_rate = 0.5;
    p.seed = 12;
    MaskedLayer L(p);
    check_column_entry(L);
    p.buckets = 4;
    p.bucket_hash = HashFamily(SeededStream(1, "b"), 0, 2, 4);
    MaskedLayer Lb(p);
    CHECK(Lb.rows() == 4 * 6 * 8);
    check_column_entry(Lb);
    for (std::uint64_t i = 0; i < p.n; ++i) {
      std::vector<ColumnEntry> col;
      Lb.column(i, col);
      for (const auto& e : col) CHECK(e.row / (6 * 8) == Lb.bucket(i));
    }
  }

  TEST_CASE("sub_tau carries tau on the mask of the preceding sub row") {
    MaskedLayerParams p;
    p.name = "t";
    p.n = 50;
    p.groups = 20;
    p.rate = 0.5;
    p.pattern = {RowKind::sub, RowKind::sub_tau};
    p.seed = 3;
    MaskedLayer L(p);
    for (std::uint64_t q = 0; q < 20; ++q)
      for (std::uint64_t i = 0; i < 50; ++i) {
        const cplx a = L.entry(L.row_of(0, q, 0), i), b = L.entry(L.row_of(0, q, 1), i);
        CHECK((a == cplx{}) == (b == cplx{}));
        if (b != cplx{}) CHECK(b == (L.tau_is_i(q, i) ? cplx(0, 1) : cplx(1, 0)));
      }
  }

  TEST_CASE("stack measurement equals dense |A x| and is phase invariant") {
    HashedLayerParams p;
    p.name = "a";
    p.n = 40;
    p.reps = 2;
    p.buckets = 7;
    p.seed = 1;
    MaskedLayerParams m;
    m.name = "b";
    m.n = 40;
    m.groups = 9;
    m.rate = 0.25;
    m.pattern = {RowKind::gaussian, RowKind::sign_tau};
    m.seed = 2;
    LayerStack st;
    st.add(std::make_shared<HashedLayer>(p));
    st.add(std::make_shared<MaskedLayer>(m));
    CHECK(st.rows() == 14 + 18);
    auto x = random_signal(40, 5);
    auto y = st.measure(x);
    auto A = oracle::materialize(st);
    auto yd = A.measure(x);
    REQUIRE(yd.size() == y.size());
    for (std::size_t r = 0; r < y.size(); ++r) CHECK(std::abs(y.values[r] - yd[r]) < 1e-12);
    ComplexSignal xr = x;
    for (auto& v : xr.values) v *= std::polar(1.0, 1.234);
    auto y2 = st.measure(xr);
    for (std::size_t r = 0; r < y.size(); ++r) CHECK(std::abs(y.values[r] - y2.values[r]) < 1e-12);
    for (double v : y.values) CHECK(v >= 0.0);
    CHECK(y.layer("a").size() == 14);
    CHECK(y.layer("b").size() == 18);
    CHECK_THROWS(y.layer("c"));
  }

  TEST_CASE("access tracking") {
    HashedLayerParams p;
    p.name = "a";
    p.n = 8;
    LayerStack st;
    st.add(std::make_shared<HashedLayer>(p));
    auto y = st.measure(ComplexSignal(8));
    y.track_access(true);
    (void)y.layer("a");
    CHECK(y.accessed() == std::set<std::string>{"a"});
  }
}
