#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cpr/exact_sparse.hpp"
#include "cpr/sketches.hpp"

namespace cpr {

// rho_i = eta_i g_i with eta_i ~ Bernoulli(rate), g_i ~ N(0, 1)
class Pivot {
 public:
  Pivot(std::uint64_t seed, double rate);
  bool eta(Index i) const { return s_.bernoulli(rate_, i, 0); }
  double g(Index i) const { return s_.gaussian(i, 1); }
  double rho(Index i) const { return eta(i) ? g(i) : 0.0; }
  double rate() const { return rate_; }

 private:
  SeededStream s_;
  double rate_;
};

class PivotLayer : public Layer {
 public:
  PivotLayer(std::string name, std::size_t n, std::shared_ptr<const Pivot> pv);
  const std::string& name() const override { return name_; }
  std::uint64_t rows() const override { return 1; }
  std::uint64_t cols() const override { return n_; }
  void column(std::uint64_t i, std::vector<ColumnEntry>& out) const override;
  cplx entry(std::uint64_t row, std::uint64_t col) const override;

 private:
  std::string name_;
  std::size_t n_;
  std::shared_ptr<const Pivot> pv_;
};

// 4B rows e^{i psi_l} rho + (H_r)_{b,.}, row = l B + b, psi_l = beta (l & 1) + (pi/2) (l >> 1),
// (H_r)_{b,i} = (1 - eta_i) sigma_{r,i} [h_r(i) = b]
class LinfRotatedLayer : public Layer {
 public:
  LinfRotatedLayer(std::string name, std::size_t n, std::size_t B, double beta, std::shared_ptr<const Pivot> pv,
                   std::uint64_t seed);
  const std::string& name() const override { return name_; }
  std::uint64_t rows() const override { return 4 * B_; }
  std::uint64_t cols() const override { return n_; }
  void column(std::uint64_t i, std::vector<ColumnEntry>& out) const override;
  cplx entry(std::uint64_t row, std::uint64_t col) const override;
  std::size_t bucket(Index i) const { return h_(i); }
  int sign(Index i) const { return s_.sign(i); }
  std::size_t buckets() const { return B_; }
  cplx rotation(std::size_t l) const;

 private:
  std::string name_;
  std::size_t n_, B_;
  double beta_;
  std::shared_ptr<const Pivot> pv_;
  HashFamily h_;
  SeededStream s_;
};

struct LinfParams {
  std::size_t n = 0;
  std::size_t k = 1;
  PhaseSet P = PhaseSet::equidistant_set(4);
  double eps = 0.0;  // 0: min(eta / (5c), pi / (9c))
  std::uint64_t seed = 0;
};

class LinfEnsemble {
 public:
  LinfEnsemble(LinfParams p, const Constants& c);
  const LayerStack& stack() const { return stack_; }
  std::uint64_t rows() const { return stack_.rows(); }
  const LinfParams& params() const { return p_; }
  const Constants& constants() const { return c_; }
  double eps() const { return eps_; }
  std::size_t R() const { return phis_.size(); }
  std::size_t B() const { return B_; }
  const HeavyHitters& hh() const { return *hh_; }
  const CountSketch& cs() const { return *cs_; }
  const Pivot& pivot() const { return *pivot_; }
  const LinfRotatedLayer& phi(std::size_t r) const { return *phis_.at(r); }
  const NoiselessEnsemble& noiseless() const { return *nl_; }

 private:
  LinfParams p_;
  Constants c_;
  double eps_;
  std::size_t B_;
  std::unique_ptr<HeavyHitters> hh_;
  std::unique_ptr<CountSketch> cs_;
  std::shared_ptr<const Pivot> pivot_;
  std::vector<std::shared_ptr<const LinfRotatedLayer>> phis_;
  std::unique_ptr<NoiselessEnsemble> nl_;
  LayerStack stack_;
};

struct LinfDiagnostics {
  bool ok = false;
  std::string branch;  // "noiseless", "certified" or "phase"
  std::string reason;
  std::vector<Index> S, S_prime;
  std::vector<double> magnitudes;    // |x^_i| for i in S
  std::vector<double> theta_tilde;   // per S' element, NaN when never isolated
  double L = 0.0;
  double p = 0.0;
  std::size_t dropped = 0;  // S' elements never isolated
};

struct LinfResult {
  SparseApprox xhat;
  LinfDiagnostics diag;
};

PhaselessMeasurements linf_measure(const LinfEnsemble& ens, const ComplexSignal& x);
double compute_L(std::span<const double> rho_layer);
LinfResult linf_decode(const PhaselessMeasurements& y, const LinfEnsemble& ens);

// l2/l2 corollary: the same decoder at sparsity ceil(k / min(eta, eps))
LinfParams linf_corollary_params(std::size_t n, std::size_t k, const PhaseSet& P, std::uint64_t seed,
                                 const Constants& c);

// max |y - |Phi xhat|| <= 1e-9 max y
bool reproduces(const LayerStack& stack, const PhaselessMeasurements& y, const SparseApprox& xhat);

}  // namespace cpr
