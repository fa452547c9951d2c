#include <cmath>
#include <numbers>
#include <queue>

#include "cpr/phase_graph.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

constexpr double kPi = std::numbers::pi;

// BFS over the undirected edge list, written independently of the library
std::vector<double> bfs_phases(const std::vector<PhaseEdge>& e, std::size_t n, std::vector<std::size_t>& comp) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& x : e) {
    adj[x.u].push_back({x.v, x.offset});
    adj[x.v].push_back({x.u, -x.offset});
  }
  std::vector<double> ph(n, 0);
  comp.assign(n, SIZE_MAX);
  std::size_t c = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (comp[r] != SIZE_MAX) continue;
    std::queue<std::size_t> q;
    q.push(r);
    comp[r] = c;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto [v, o] : adj[u])
        if (comp[v] == SIZE_MAX) {
          comp[v] = c;
          ph[v] = ph[u] + o;
          q.push(v);
        }
    }
    ++c;
  }
  return ph;
}

}  // namespace

TEST_SUITE("phase_graph") {
  TEST_CASE("propagation along a path") {
    std::vector<PhaseEdge> e = {{0, 1, 0.5}, {1, 2, 1.0}, {2, 3, 2.0}};
    auto p = dfs_propagate(e, 4);
    CHECK(p.connected());
    CHECK(circ_dist(p.phase[3], 3.5) < 1e-12);
    CHECK(circ_dist(p.phase[2], 1.5) < 1e-12);
    auto empty = dfs_propagate({}, 5);
    CHECK(empty.roots.size() == 5);
  }

  TEST_CASE("propagation matches BFS on random consistent graphs") {
    SeededStream s(3, "dfs");
    for (std::size_t t = 0; t < 50; ++t) {
      const std::size_t n = 30;
      std::vector<double> truth(n);
      for (std::size_t v = 0; v < n; ++v) truth[v] = 2 * kPi * s.uniform(t, v);
      std::vector<PhaseEdge> e;
      for (std::size_t j = 0; j < 40; ++j) {
        auto [u, v] = random_pair(s.child(t), n, j);
        e.push_back({u, v, wrap_phase(truth[v] - truth[u])});
      }
      std::vector<std::size_t> comp;
      auto bfs = bfs_phases(e, n, comp);
      auto p = dfs_propagate(e, n);
      for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
          CHECK((comp[u] == comp[v]) == (p.component[u] == p.component[v]));
          if (comp[u] == comp[v]) CHECK(circ_dist(p.phase[v] - p.phase[u], bfs[v] - bfs[u]) < 1e-9);
        }
    }
  }

  TEST_CASE("phase prediction") {
    PhasePredictionOptions opt;
    opt.grid = PhaseSet::equidistant_set(4);
    // two vertices, plurality of three samples
    auto a = solve_phase_prediction(2, {{0, 1, kPi / 2}, {0, 1, kPi / 2}, {0, 1, kPi}}, opt);
    REQUIRE(a.ok);
    CHECK(circ_dist(a.phase[1] - a.phase[0], kPi / 2) < 1e-12);
    // all correct, every vertex within two hops of the anchor 0
    std::vector<PhaseSample> star{{0, 1, kPi / 2}, {0, 2, kPi}, {0, 3, 0.0}, {1, 4, kPi}, {2, 5, kPi / 2}};
    const double truth[6] = {0, kPi / 2, kPi, 0, 3 * kPi / 2, 3 * kPi / 2};
    auto b = solve_phase_prediction(6, star, opt);
    REQUIRE(b.ok);
    CHECK(b.anchor == 0);
    for (std::size_t v = 1; v < 6; ++v) CHECK(circ_dist(b.phase[v] - b.phase[0], truth[v]) < 1e-9);
    // a vertex three hops away has no evidence
    auto far = solve_phase_prediction(4, {{0, 1, 0.0}, {0, 2, 0.0}, {1, 3, 0.0}, {3, 2, 0.0}}, opt);
    CHECK(far.ok);
    auto path = solve_phase_prediction(5, {{0, 1, 0.0}, {1, 2, 0.0}, {2, 3, 0.0}, {3, 4, 0.0}}, opt);
    CHECK_FALSE(path.ok);
    // an isolated vertex has no evidence
    auto c = solve_phase_prediction(3, {{0, 1, 0.0}}, opt);
    CHECK_FALSE(c.ok);
  }

  TEST_CASE("union find and random pairs") {
    UnionFind uf(5);
    CHECK(uf.unite(0, 1));
    CHECK_FALSE(uf.unite(1, 0));
    CHECK(uf.components() == 4);
    SeededStream s(1, "pairs");
    for (std::size_t j = 0; j < 1000; ++j) {
      auto [u, v] = random_pair(s, 7, j);
      CHECK(u != v);
      CHECK(u < 7);
      CHECK(v < 7);
    }
  }

  TEST_CASE("connectivity threshold") {
    CHECK(connectivity_threshold_check(2, 1, 50, 1) == 1.0);
    CHECK(connectivity_threshold_check(10, 0, 50, 1) == 0.0);
    const std::size_t n = 1024;
    const auto N = static_cast<std::size_t>(std::ceil(2.0 * n * std::log2(double(n))));
    CHECK(connectivity_threshold_check(n, N, 1000, 7) >= 0.999);
  }
}
