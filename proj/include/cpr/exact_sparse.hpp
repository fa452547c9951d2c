#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cpr/constants.hpp"
#include "cpr/ensemble.hpp"

namespace cpr {

// omega^j = exp(2 pi i j / n), j < n
class OmegaTable {
 public:
  explicit OmegaTable(std::size_t n);
  cplx pow(std::uint64_t e) const { return w_[e % w_.size()]; }
  std::size_t n() const { return w_.size(); }

 private:
  std::vector<cplx> w_;
};

// Rows of one bucket, M = number of frequencies:
//   singles    |f_m|,              f_m = gamma_m sum_i omega^{m i} z_i,  m < M
//   prefix     |s_m|,              s_m = f_0 + ... + f_m
//   companion  |s_{m-1} + i f_m|,  1 <= m < M
struct BucketProblem {
  std::size_t n = 0;
  std::size_t M = 0;
  std::size_t K = 0;  // capacity
  std::vector<double> singles, prefix, companions;
  std::vector<cplx> gamma;  // empty: all ones
  std::function<bool(Index)> member;  // optional: positions allowed in this bucket
};

struct BucketSolution {
  bool ok = false;
  std::string reason;
  std::vector<Index> support;
  std::vector<cplx> values;
};

struct BucketRows {
  std::vector<double> singles, prefix, companions;
};

BucketRows bucket_forward(const OmegaTable& w, std::size_t M, const std::vector<cplx>& gamma,
                          const std::vector<Index>& support, const std::vector<cplx>& values);

BucketSolution solve_bucket(const BucketProblem& p, const OmegaTable& w);

struct NoiselessParams {
  std::size_t n = 0;
  std::size_t k = 1;
  double tradeoff_a = -1.0;  // < 0: default bucket count
  bool companions = true;    // false: real mode, stitch rows carry no orientation
  bool pool_levels = true;   // stitch with the two-hit rows of every level, not only level l
  std::uint64_t seed = 0;
  std::string prefix = "nl";
};

class NoiselessBucketLayer;

class NoiselessEnsemble {
 public:
  NoiselessEnsemble(NoiselessParams p, const Constants& c);

  const LayerStack& stack() const { return stack_; }
  PhaselessMeasurements measure(const ComplexSignal& x) const { return stack_.measure(x); }
  std::size_t buckets() const { return B_; }
  std::size_t K() const { return K_; }
  std::size_t M() const { return M_; }
  std::size_t max_level() const { return stitch_.size(); }
  std::size_t bucket_of(Index i) const { return h_(i); }
  const HashFamily& hash() const { return h_; }
  const MaskedLayer& stitch_layer(std::size_t l) const { return *stitch_.at(l - 1); }
  const NoiselessBucketLayer& bucket_layer() const { return *bucket_layer_; }
  const NoiselessParams& params() const { return p_; }
  const Constants& constants() const { return c_; }
  const OmegaTable& omega() const { return *omega_; }
  std::vector<cplx> gamma(std::size_t bucket) const;
  std::uint64_t rows() const { return stack_.rows(); }

 private:
  NoiselessParams p_;
  Constants c_;
  std::size_t B_, K_, M_;
  HashFamily h_;
  std::shared_ptr<const OmegaTable> omega_;
  std::shared_ptr<const NoiselessBucketLayer> bucket_layer_;
  std::vector<std::shared_ptr<const MaskedLayer>> stitch_;
  LayerStack stack_;
};

class NoiselessBucketLayer : public Layer {
 public:
  NoiselessBucketLayer(std::string name, std::size_t n, std::size_t B, std::size_t M, HashFamily h,
                       std::shared_ptr<const OmegaTable> w, std::uint64_t seed);
  const std::string& name() const override { return name_; }
  std::uint64_t rows() const override { return B_ * per_bucket(); }
  std::uint64_t cols() const override { return n_; }
  void column(std::uint64_t i, std::vector<ColumnEntry>& out) const override;
  cplx entry(std::uint64_t row, std::uint64_t col) const override;
  std::uint64_t per_bucket() const { return 3 * M_ - 1; }
  cplx gamma(std::size_t b, std::size_t m) const;

 private:
  std::string name_;
  std::size_t n_, B_, M_;
  HashFamily h_;
  std::shared_ptr<const OmegaTable> w_;
  SeededStream gamma_;
};

struct TwoHitRow {
  std::uint64_t q;
  Index u, v;  // u < v
};

// rows of the level-l stitch layer whose mask meets supp in exactly two positions
std::vector<TwoHitRow> count_two_hit_rows(const MaskedLayer& layer, const std::vector<Index>& supp);

struct NoiselessDiagnostics {
  bool ok = false;
  std::string reason;
  std::size_t support_size = 0;
  std::size_t occupied_buckets = 0;
  std::size_t level = 0;
  std::size_t two_hit_rows = 0;
  std::size_t edges = 0;
  std::size_t groups = 0;
  std::size_t connected_groups = 0;
  std::size_t winner_votes = 0;
  std::size_t failed_buckets = 0;
};

struct NoiselessResult {
  SparseApprox xhat;
  NoiselessDiagnostics diag;
};

NoiselessResult noiseless_decode(const PhaselessMeasurements& y, const NoiselessEnsemble& ens);

// rotate so the largest-magnitude coordinate (lowest index among near-ties) is positive real
void canonicalize(SparseApprox& x);

}  // namespace cpr
