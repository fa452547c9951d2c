#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpr/random.hpp"
#include "cpr/signal.hpp"

namespace cpr {

struct ColumnEntry {
  std::uint64_t row;
  cplx w;
};

// One block of rows of an implicit sensing matrix. column() enumerates the nonzero
// entries of a column without touching other rows; entry() answers a single (row, col)
// through a separate code path so the two can be cross-checked against each other.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const std::string& name() const = 0;
  virtual std::uint64_t rows() const = 0;
  virtual std::uint64_t cols() const = 0;
  virtual void column(std::uint64_t i, std::vector<ColumnEntry>& out) const = 0;
  virtual cplx entry(std::uint64_t row, std::uint64_t col) const = 0;
  // out = (this layer) * x, out has rows() entries
  virtual void apply(const ComplexSignal& x, cplx* out) const;
};

using LayerPtr = std::shared_ptr<const Layer>;

struct LayerSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

class PhaselessMeasurements {
 public:
  std::vector<double> values;
  std::vector<LayerSlice> layers;

  std::span<const double> layer(std::string_view name) const;
  bool has_layer(std::string_view name) const;
  std::size_t size() const { return values.size(); }

  // records every layer name read through layer(); used to check non-adaptivity
  void track_access(bool on) const;
  const std::set<std::string>& accessed() const { return accessed_; }

 private:
  mutable bool tracking_ = false;
  mutable std::set<std::string> accessed_;
};

class LayerStack {
 public:
  void add(LayerPtr l);
  void append(const LayerStack& other);
  std::uint64_t rows() const;
  std::uint64_t cols() const { return cols_; }
  const std::vector<LayerPtr>& layers() const { return layers_; }
  const Layer& layer(std::string_view name) const;
  PhaselessMeasurements measure(const ComplexSignal& x) const;
  // linear (pre-magnitude) values, used by tests and the internal residual of the l1 loop
  std::vector<cplx> apply(const ComplexSignal& x) const;

 private:
  std::vector<LayerPtr> layers_;
  std::uint64_t cols_ = 0;
};

enum class WeightKind { one, sign, gaussian, phase };  // phase: e^{i phi}, phi uniform

// reps x buckets rows. Column i goes to bucket h_r(key(i)) of each rep r with weight
// w_r(i), key(i) = (i >> shift) & key_mask. When the key space fits in the buckets the
// key is used as the bucket directly.
struct HashedLayerParams {
  std::string name;
  std::uint64_t n = 0;
  std::uint64_t reps = 1;
  std::uint64_t buckets = 1;
  unsigned shift = 0;
  std::uint64_t key_space = 0;  // 0: n >> shift (rounded up)
  WeightKind weight = WeightKind::sign;
  std::size_t independence = 2;
  std::uint64_t seed = 0;
};

class HashedLayer : public Layer {
 public:
  explicit HashedLayer(HashedLayerParams p);
  const std::string& name() const override { return p_.name; }
  std::uint64_t rows() const override { return p_.reps * p_.buckets; }
  std::uint64_t cols() const override { return p_.n; }
  void column(std::uint64_t i, std::vector<ColumnEntry>& out) const override;
  cplx entry(std::uint64_t row, std::uint64_t col) const override;

  std::uint64_t key(std::uint64_t i) const;
  std::uint64_t bucket_of_key(std::uint64_t rep, std::uint64_t key) const;
  std::uint64_t bucket(std::uint64_t rep, std::uint64_t i) const { return bucket_of_key(rep, key(i)); }
  cplx weight(std::uint64_t rep, std::uint64_t i) const;
  const HashedLayerParams& params() const { return p_; }
  bool identity() const { return identity_; }

 private:
  HashedLayerParams p_;
  std::uint64_t key_mask_;
  bool identity_;
  std::vector<HashFamily> hashes_;
  SeededStream weights_;
};

enum class RowKind {
  one,       // 1
  sign,      // sigma_{q,j,i}
  gaussian,  // g_{q,j,i}
  xi_gauss,  // xi_{q,j,i} g_{q,j,i}, xi ~ Bernoulli(1/2)
  sub,       // Bernoulli(sub_rate) 0/1
  one_tau,   // tau_{q,i}
  sign_tau,  // sigma_{q,j,i} tau_{q,i}
  sub_tau,   // tau_{q,i} on the sub mask of the preceding row
};

// Groups of rows sharing a Bernoulli(rate) column mask delta_{q,i}. Each group has
// pattern.size() rows whose entries are delta_{q,i} times a per-row weight. With a
// bucket hash, every bucket owns its own `groups` groups and column i only appears in
// the groups of bucket h(i). tau_{q,i} is 1 or i with probability 1/2 each.
struct MaskedLayerParams {
  std::string name;
  std::uint64_t n = 0;
  std::uint64_t groups = 0;
  double rate = 0.0;
  std::vector<RowKind> pattern = {RowKind::one};
  double sub_rate = 0.5;
  std::uint64_t buckets = 1;  // 1: no bucket restriction
  HashFamily bucket_hash;    // used when buckets > 1
  std::uint64_t seed = 0;
};

class MaskedLayer : public Layer {
 public:
  explicit MaskedLayer(MaskedLayerParams p);
  const std::string& name() const override { return p_.name; }
  std::uint64_t rows() const override { return p_.buckets * p_.groups * p_.pattern.size(); }
  std::uint64_t cols() const override { return p_.n; }
  void column(std::uint64_t i, std::vector<ColumnEntry>& out) const override;
  cplx entry(std::uint64_t row, std::uint64_t col) const override;

  std::uint64_t bucket(std::uint64_t i) const;
  // groups q (local to bucket(i)) with delta_{q,i} = 1
  std::vector<std::uint64_t> groups_of(std::uint64_t i) const;
  cplx weight(std::uint64_t q, std::uint64_t j, std::uint64_t i) const;  // group-local q
  bool tau_is_i(std::uint64_t q, std::uint64_t i) const;
  bool xi(std::uint64_t q, std::uint64_t j, std::uint64_t i) const;
  bool sub(std::uint64_t q, std::uint64_t j, std::uint64_t i) const;
  std::uint64_t row_of(std::uint64_t bucket, std::uint64_t q, std::uint64_t j) const {
    return (bucket * p_.groups + q) * p_.pattern.size() + j;
  }
  const MaskedLayerParams& params() const { return p_; }

 private:
  MaskedLayerParams p_;
  SeededStream mask_, w_, xi_, sub_, tau_;
};

}  // namespace cpr
