#pragma once

#include <memory>
#include <vector>

#include "cpr/sketches.hpp"

namespace cpr {

enum class Half { first, sec };

// first: the top ceil(log n / 2) bits of i, sec: the remaining low bits
std::uint64_t bit_split(Index i, std::uint64_t n, Half h);

struct BitSplitNode {
  unsigned shift = 0, bits = 0;  // key = (i >> shift) & (2^bits - 1)
  int first = -1, sec = -1;      // children, -1 at a leaf
  std::size_t depth = 0;
  std::shared_ptr<const CountMin> cm;
};

// Recursive halving of the index bits. A node whose key space is at most
// max(64, k^2) is a leaf and is scanned exhaustively.
class BitSplitTree {
 public:
  BitSplitTree(std::uint64_t n, std::uint64_t k, double eps, const SketchConstants& sc, std::uint64_t seed);
  const std::vector<BitSplitNode>& nodes() const { return nodes_; }
  const BitSplitNode& root() const { return nodes_.front(); }
  std::size_t depth() const;
  std::uint64_t leaf_limit() const { return leaf_limit_; }
  const LayerStack& stack() const { return stack_; }
  // heavy keys of node id
  std::vector<std::uint64_t> identify(const PhaselessMeasurements& y, std::size_t id = 0) const;

 private:
  std::size_t build(unsigned shift, unsigned bits, std::size_t depth);

  std::uint64_t n_, k_, leaf_limit_;
  double eps_;
  SketchConstants sc_;
  std::uint64_t seed_;
  std::vector<BitSplitNode> nodes_;
  LayerStack stack_;
};

struct L1Params {
  std::size_t n = 0;  // power of two
  std::size_t k = 1;
  double eps = 0.5;
  std::uint64_t seed = 0;
};

class L1Ensemble {
 public:
  L1Ensemble(L1Params p, const Constants& c);
  const LayerStack& stack() const { return stack_; }
  std::uint64_t rows() const { return stack_.rows(); }
  std::uint64_t identification_rows() const { return tree_->stack().rows(); }
  std::uint64_t estimation_rows() const { return est_->rows(); }
  const L1Params& params() const { return p_; }
  const Constants& constants() const { return c_; }
  const BitSplitTree& tree() const { return *tree_; }
  // d blocks of w 0/1 buckets: adjacency of a random left-d-regular bipartite graph
  const HashedLayer& estimator() const { return *est_; }
  std::size_t rounds() const;

 private:
  L1Params p_;
  Constants c_;
  std::unique_ptr<BitSplitTree> tree_;
  std::shared_ptr<const HashedLayer> est_;
  LayerStack stack_;
};

PhaselessMeasurements l1_measure(const L1Ensemble& ens, const ComplexSignal& x);
std::vector<Index> l1_identify(const PhaselessMeasurements& y, const L1Ensemble& ens);

struct L1Diagnostics {
  std::size_t candidates = 0;
  std::vector<double> residual;  // estimated l1 mass of the residual after each round
  std::size_t best_round = 0;
  bool stopped_early = false;
};

struct L1Result {
  SparseApprox xhat;
  L1Diagnostics diag;
};

L1Result l1_decode(const PhaselessMeasurements& y, const L1Ensemble& ens);

}  // namespace cpr
