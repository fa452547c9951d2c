#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpr/random.hpp"
#include "cpr/signal.hpp"

namespace cpr {

// d estimates phase(v) - phase(u)
struct PhaseSample {
  std::size_t u = 0, v = 0;
  double d = 0.0;
};

struct PhasePredictionOptions {
  // allowed values of a phase difference; votes are rounded onto it. Without a grid,
  // votes are clustered with circular tolerance `tolerance`.
  std::optional<PhaseSet> grid;
  double tolerance = 0.1;
  int sweeps = 3;
};

struct PhaseAssignment {
  bool ok = false;
  std::size_t anchor = 0;
  std::vector<double> phase;  // phase[anchor] = 0
  int sweeps_used = 0;
  std::string reason;
};

PhaseAssignment solve_phase_prediction(std::size_t n, const std::vector<PhaseSample>& samples,
                                       const PhasePredictionOptions& opt);

struct PhaseEdge {
  std::size_t u = 0, v = 0;
  double offset = 0.0;  // phase(v) - phase(u)
};

struct Propagation {
  std::vector<double> phase;          // component root at 0
  std::vector<std::size_t> component; // component id per vertex
  std::vector<std::size_t> roots;     // lowest vertex of each component
  bool connected() const { return roots.size() <= 1; }
};

Propagation dfs_propagate(const std::vector<PhaseEdge>& edges, std::size_t n);

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t a);
  bool unite(std::size_t a, std::size_t b);
  std::size_t components() const { return components_; }

 private:
  std::vector<std::size_t> parent_, rank_;
  std::size_t components_;
};

// uniform pair {u, v}, u != v (n >= 2)
std::pair<std::size_t, std::size_t> random_pair(const SeededStream& s, std::size_t n, std::uint64_t index);

// fraction of `trials` random graphs with num_samples uniform pairs that are connected
double connectivity_threshold_check(std::size_t n, std::size_t num_samples, std::size_t trials, std::uint64_t seed);

}  // namespace cpr
