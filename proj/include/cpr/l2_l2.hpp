#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cpr/phase_graph.hpp"
#include "cpr/sketches.hpp"

namespace cpr {

struct L2Params {
  std::size_t n = 0;
  std::size_t k = 1;
  PhaseSet P = PhaseSet::equidistant_set(2);
  double eps = 0.5;
  double delta = 0.1;
  std::uint64_t seed = 0;
};

// Rows of one (l, r) block pair. The in-bucket block owns rho groups per bucket,
// the combine block Q groups of noise rows followed by phase rows.
struct L2Block {
  std::size_t l = 0, r = 0;
  std::size_t buckets = 1;
  std::size_t rho = 0, Q = 0;
  double rel_rate = 0.0, comb_rate = 0.0;
  std::size_t noise_rows = 0, phase_rows = 0;
  HashFamily hash;
  std::shared_ptr<const MaskedLayer> rel, comb;
};

class L2Ensemble {
 public:
  L2Ensemble(L2Params p, const Constants& c);
  const LayerStack& stack() const { return stack_; }
  std::uint64_t rows() const { return stack_.rows(); }
  const L2Params& params() const { return p_; }
  const Constants& constants() const { return c_; }
  const HeavyHitters& hh() const { return *hh_; }
  const CountSketch& cs() const { return *cs_; }
  std::size_t C2k() const { return C2k_; }
  double log_C2k() const { return lambda_; }
  std::size_t max_level() const { return Lmax_; }
  std::size_t max_reps() const { return Dmax_; }
  const MaskedLayer& approx_layer(std::size_t t) const { return *approx_.at(t - 1); }  // t in [1, C2k]
  const L2Block& block(std::size_t l, std::size_t r) const { return blocks_.at((l - 1) * Dmax_ + r); }
  // phase differences between elements of P
  const PhaseSet& D() const { return D_; }
  // P has phases other than a single antipodal pair, so relative phases need an orientation
  bool complex_mode() const { return complex_; }
  std::size_t reps_for(std::size_t T) const;
  double eta() const { return eta_; }
  double eta2() const { return std::pow(eta_, c_.l2.eta_power); }  // eta^2 in strict mode

  // formulas, exposed for the row-count checks
  std::size_t buckets_for_level(std::size_t l) const;
  std::size_t rho_for_level(std::size_t l) const;
  std::size_t Q_for_level(std::size_t l) const;

 private:
  L2Params p_;
  Constants c_;
  std::size_t C2k_ = 0, Lmax_ = 0, Dmax_ = 0;
  double lambda_ = 0.0, eta_ = 0.0;
  PhaseSet D_;
  bool complex_ = false;
  std::unique_ptr<HeavyHitters> hh_;
  std::unique_ptr<CountSketch> cs_;
  std::vector<std::shared_ptr<const MaskedLayer>> approx_;
  std::vector<L2Block> blocks_;
  LayerStack stack_;
};

// median of squared magnitudes of one ComputeApprox layer
double compute_approx(std::span<const double> layer);

struct PruneResult {
  std::vector<Index> T;  // sorted
  std::size_t l0 = 0;    // 2^(l0-1) < |T| <= 2^l0
  double threshold = 0.0;
};

// S and mags aligned; L[t-1] = L_t
PruneResult prune(const std::vector<Index>& S, const std::vector<double>& mags, const std::vector<double>& L,
                  double eps, double C0, double log_C2k);

struct BucketPhases {
  bool ok = false;
  std::string reason;
  std::vector<double> phase;  // per member, phase[0] = 0
  std::size_t good = 0, groups = 0, solved = 0;
};

// members sorted, mags aligned with members
BucketPhases rel_phases_in_bucket(std::span<const double> y_block, const L2Block& blk, std::size_t bucket,
                                  const std::vector<Index>& members, const std::vector<double>& mags,
                                  const PhaseSet& D, const Constants& c);

struct CombineResult {
  bool ok = false;
  std::string reason;
  std::vector<double> offset;  // per bucket of the occupied list, root at 0
  std::size_t good = 0, accepted = 0, rejected = 0, edges = 0;
};

// T sorted, mags and inner (in-bucket phases) aligned with T; occupied lists the buckets
// of h(T) in increasing order
CombineResult combine_buckets(std::span<const double> y_block, const L2Block& blk, const std::vector<Index>& T,
                              const std::vector<double>& mags, const std::vector<double>& inner,
                              const std::vector<std::size_t>& occupied, double L_T, double log_C2k, double eps,
                              double eta, const PhaseSet& D, const Constants& c);

struct L2Repetition {
  bool ok = false;
  std::string reason;
  std::size_t buckets = 0, edges = 0, accepted = 0;
};

struct L2Diagnostics {
  bool ok = false;
  std::string reason;
  std::vector<Index> S, T;
  std::vector<double> L;
  std::size_t l = 0, reps = 0, votes = 0;
  std::vector<L2Repetition> repetitions;
};

struct L2Result {
  SparseApprox xhat;
  L2Diagnostics diag;
};

PhaselessMeasurements l2_measure(const L2Ensemble& ens, const ComplexSignal& x);
L2Result l2_decode(const PhaselessMeasurements& y, const L2Ensemble& ens);
std::string l2_diagnostics_json(const L2Diagnostics& d);

// integer pattern of phases rounded onto D relative to the first entry, and its hash
std::vector<std::size_t> canonical_pattern(const std::vector<double>& phase, const PhaseSet& D);
std::uint64_t pattern_hash(const std::vector<std::size_t>& pattern);

}  // namespace cpr
