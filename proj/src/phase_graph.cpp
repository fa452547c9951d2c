#include "cpr/phase_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "cpr/phase.hpp"

namespace cpr {

namespace {

struct Arc {
  std::size_t to;
  double d;
};

// winner of a vote; nullopt when there are no votes
std::optional<double> plurality(std::vector<double>& votes, const PhasePredictionOptions& opt) {
  if (votes.empty()) return std::nullopt;
  if (opt.grid) {
    std::map<double, std::size_t> count;
    for (double v : votes) ++count[round_to_phase_set(v, *opt.grid).first];
    double best = 0.0;
    std::size_t bc = 0;
    for (const auto& [ph, c] : count)
      if (c > bc) {
        bc = c;
        best = ph;
      }
    return best;
  }
  std::sort(votes.begin(), votes.end());
  std::size_t bc = 0;
  double best = votes[0];
  for (double c : votes) {
    std::size_t cnt = 0;
    double sx = 0, sy = 0;
    for (double v : votes)
      if (circ_dist(c, v) <= opt.tolerance) {
        ++cnt;
        sx += std::cos(v);
        sy += std::sin(v);
      }
    if (cnt > bc) {
      bc = cnt;
      best = wrap_phase(std::atan2(sy, sx));
    }
  }
  return best;
}

}  // namespace

PhaseAssignment solve_phase_prediction(std::size_t n, const std::vector<PhaseSample>& samples,
                                       const PhasePredictionOptions& opt) {
  PhaseAssignment out;
  out.phase.assign(n, 0.0);
  if (n == 0) {
    out.ok = true;
    return out;
  }
  std::vector<std::vector<Arc>> adj(n);
  for (const auto& s : samples) {
    if (s.u >= n || s.v >= n) throw std::out_of_range("solve_phase_prediction: vertex out of range");
    if (s.u == s.v) continue;
    adj[s.u].push_back({s.v, wrap_phase(s.d)});
    adj[s.v].push_back({s.u, wrap_phase(-s.d)});
  }
  std::size_t a = 0;
  for (std::size_t v = 1; v < n; ++v)
    if (adj[v].size() > adj[a].size()) a = v;
  out.anchor = a;

  std::vector<std::vector<double>> votes(n);
  for (const auto& e : adj[a]) {
    votes[e.to].push_back(e.d);
    for (const auto& f : adj[e.to])
      if (f.to != a) votes[f.to].push_back(e.d + f.d);
  }
  std::vector<char> known(n, 0);
  known[a] = 1;
  for (std::size_t v = 0; v < n; ++v) {
    if (v == a) continue;
    if (auto w = plurality(votes[v], opt)) {
      out.phase[v] = *w;
      known[v] = 1;
    }
  }
  if (std::find(known.begin(), known.end(), 0) != known.end()) {
    out.reason = "vertex without direct or two-hop evidence";
    out.ok = false;
    return out;
  }
  std::vector<double> vv;
  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == a || adj[v].empty()) continue;
      vv.clear();
      for (const auto& e : adj[v]) vv.push_back(out.phase[e.to] - e.d);
      double w = *plurality(vv, opt);
      if (circ_dist(w, out.phase[v]) > 1e-12) {
        out.phase[v] = w;
        changed = true;
      }
    }
    out.sweeps_used = sweep + 1;
    if (!changed) break;
  }
  out.ok = true;
  return out;
}

Propagation dfs_propagate(const std::vector<PhaseEdge>& edges, std::size_t n) {
  std::vector<std::vector<Arc>> adj(n);
  for (const auto& e : edges) {
    if (e.u >= n || e.v >= n) throw std::out_of_range("dfs_propagate: vertex out of range");
    adj[e.u].push_back({e.v, e.offset});
    adj[e.v].push_back({e.u, -e.offset});
  }
  Propagation p;
  p.phase.assign(n, 0.0);
  p.component.assign(n, SIZE_MAX);
  std::vector<std::size_t> stack;
  for (std::size_t r = 0; r < n; ++r) {
    if (p.component[r] != SIZE_MAX) continue;
    const std::size_t id = p.roots.size();
    p.roots.push_back(r);
    p.component[r] = id;
    stack.push_back(r);
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& e : adj[u])
        if (p.component[e.to] == SIZE_MAX) {
          p.component[e.to] = id;
          p.phase[e.to] = wrap_phase(p.phase[u] + e.d);
          stack.push_back(e.to);
        }
    }
  }
  return p;
}

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --components_;
  return true;
}

std::pair<std::size_t, std::size_t> random_pair(const SeededStream& s, std::size_t n, std::uint64_t index) {
  std::size_t u = s.below(n, index, 0);
  std::size_t v = s.below(n - 1, index, 1);
  if (v >= u) ++v;
  return {u, v};
}

double connectivity_threshold_check(std::size_t n, std::size_t num_samples, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) return 0.0;
  if (n <= 1) return 1.0;
  SeededStream root(seed, "connectivity");
  std::size_t ok = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    SeededStream s = root.child(t);
    UnionFind uf(n);
    for (std::size_t j = 0; j < num_samples && uf.components() > 1; ++j) {
      auto [u, v] = random_pair(s, n, j);
      uf.unite(u, v);
    }
    ok += uf.components() == 1;
  }
  return double(ok) / double(trials);
}

}  // namespace cpr
