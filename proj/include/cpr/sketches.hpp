#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpr/constants.hpp"
#include "cpr/ensemble.hpp"

namespace cpr {

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

std::uint64_t ceil_log2(std::uint64_t n);  // 0 for n <= 1
double log2_or_one(double v);              // max(1, log2 v)
std::uint64_t cs_default_reps(std::uint64_t n, const SketchConstants& sc);  // odd

// reps x (bucket_mult*K) buckets of random-sign sums; point queries are medians of
// bucket magnitudes.
class CountSketch {
 public:
  CountSketch(std::uint64_t n, std::uint64_t K, std::uint64_t reps, double bucket_mult, std::uint64_t seed,
              std::string name = "cs");
  LayerPtr layer() const { return layer_; }
  LayerStack stack() const;
  double point_query(std::span<const double> y, Index i) const;
  std::uint64_t K() const { return K_; }
  std::uint64_t buckets() const { return layer_->params().buckets; }
  std::uint64_t reps() const { return layer_->params().reps; }
  const HashedLayer& hashed() const { return *layer_; }

 private:
  std::uint64_t K_;
  std::shared_ptr<const HashedLayer> layer_;
};

// Dyadic bit-testing tree. Level l holds a sketch of the 2^l prefixes i >> (L - l);
// decoding walks down from the first level wide enough to hold the beam, keeping
// the beam*K children with the largest median bucket magnitude.
class HeavyHitters {
 public:
  HeavyHitters(std::uint64_t n, std::uint64_t K, const SketchConstants& sc, std::uint64_t seed,
               std::string prefix = "hh");
  const LayerStack& stack() const { return stack_; }
  std::vector<Index> identify(const PhaselessMeasurements& y) const;
  std::uint64_t cap() const { return beam_; }
  std::uint64_t K() const { return K_; }

 private:
  std::uint64_t n_, K_, beam_, bits_, first_level_;
  std::string prefix_;
  std::vector<std::shared_ptr<const HashedLayer>> levels_;
  LayerStack stack_;
};

// Count-Min on the key (i >> shift) restricted to `bits` bits, 0/1 entries.
class CountMin {
 public:
  CountMin(std::uint64_t n, unsigned shift, unsigned bits, std::uint64_t k, double eps, const SketchConstants& sc,
           std::uint64_t seed, std::string name);
  LayerPtr layer() const { return layer_; }
  const HashedLayer& hashed() const { return *layer_; }
  // upper bound on the l1 tail: median over reps of (total - top-k buckets)
  double tail_estimate(std::span<const double> y) const;
  double min_estimate(std::span<const double> y, std::uint64_t key) const;
  std::vector<std::uint64_t> identify(std::span<const double> y, const std::vector<std::uint64_t>& candidates) const;
  std::uint64_t cap() const { return cap_; }
  std::uint64_t key_space() const { return std::uint64_t{1} << bits_; }

 private:
  std::uint64_t k_;
  double eps_;
  unsigned bits_;
  std::uint64_t cap_;
  std::shared_ptr<const HashedLayer> layer_;
};

PhaselessMeasurements cs_measure(const CountSketch& cs, const ComplexSignal& x);
double cs_point_query(const PhaselessMeasurements& y, const CountSketch& cs, Index i);
PhaselessMeasurements hh_measure(const HeavyHitters& hh, const ComplexSignal& x);
std::vector<Index> hh_identify(const PhaselessMeasurements& y, const HeavyHitters& hh);
std::vector<std::uint64_t> cm_identify(std::span<const double> y, const CountMin& cm,
                                       const std::vector<std::uint64_t>& candidates);
void require_nonnegative(const ComplexSignal& x);

}  // namespace cpr
