#include "cpr/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <numbers>
#include <stdexcept>

namespace cpr {

void Layer::apply(const ComplexSignal& x, cplx* out) const {
  std::fill(out, out + rows(), cplx{});
  std::vector<ColumnEntry> col;
  for (std::uint64_t i = 0; i < x.n(); ++i) {
    if (x[i] == cplx{}) continue;
    col.clear();
    column(i, col);
    for (const auto& e : col) out[e.row] += e.w * x[i];
  }
}

std::span<const double> PhaselessMeasurements::layer(std::string_view name) const {
  for (const auto& l : layers)
    if (l.name == name) {
      if (tracking_) accessed_.insert(l.name);
      return {values.data() + l.offset, l.size};
    }
  throw std::out_of_range("measurements: no layer " + std::string(name));
}

bool PhaselessMeasurements::has_layer(std::string_view name) const {
  return std::any_of(layers.begin(), layers.end(), [&](const LayerSlice& l) { return l.name == name; });
}

void PhaselessMeasurements::track_access(bool on) const {
  tracking_ = on;
  accessed_.clear();
}

void LayerStack::add(LayerPtr l) {
  if (!layers_.empty() && l->cols() != cols_) throw std::invalid_argument("LayerStack: column count mismatch");
  for (const auto& e : layers_)
    if (e->name() == l->name()) throw std::invalid_argument("LayerStack: duplicate layer " + l->name());
  cols_ = l->cols();
  layers_.push_back(std::move(l));
}

void LayerStack::append(const LayerStack& other) {
  for (const auto& l : other.layers_) add(l);
}

std::uint64_t LayerStack::rows() const {
  std::uint64_t m = 0;
  for (const auto& l : layers_) m += l->rows();
  return m;
}

const Layer& LayerStack::layer(std::string_view name) const {
  for (const auto& l : layers_)
    if (l->name() == name) return *l;
  throw std::out_of_range("LayerStack: no layer " + std::string(name));
}

std::vector<cplx> LayerStack::apply(const ComplexSignal& x) const {
  if (x.n() != cols_) throw std::invalid_argument("measure: dimension mismatch");
  std::vector<cplx> lin(rows());
  std::size_t off = 0;
  for (const auto& l : layers_) {
    l->apply(x, lin.data() + off);
    off += l->rows();
  }
  return lin;
}

PhaselessMeasurements LayerStack::measure(const ComplexSignal& x) const {
  auto lin = apply(x);
  PhaselessMeasurements y;
  y.values.resize(lin.size());
  kernels::magnitudes(lin.data(), y.values.data(), lin.size());
  std::size_t off = 0;
  for (const auto& l : layers_) {
    y.layers.push_back({l->name(), off, l->rows()});
    off += l->rows();
  }
  return y;
}

HashedLayer::HashedLayer(HashedLayerParams p) : p_(std::move(p)) {
  if (p_.n == 0 || p_.reps == 0 || p_.buckets == 0) throw std::invalid_argument("HashedLayer: bad sizes");
  std::uint64_t space = p_.key_space ? p_.key_space : ((p_.n - 1) >> p_.shift) + 1;
  p_.key_space = space;
  key_mask_ = std::bit_ceil(space) - 1;
  identity_ = space <= p_.buckets;
  SeededStream s(p_.seed, "hashed:" + p_.name);
  for (std::uint64_t r = 0; r < p_.reps; ++r) hashes_.emplace_back(s, r, p_.independence, p_.buckets);
  weights_ = s.child("weights");
}

std::uint64_t HashedLayer::key(std::uint64_t i) const { return (i >> p_.shift) & key_mask_; }

std::uint64_t HashedLayer::bucket_of_key(std::uint64_t rep, std::uint64_t k) const {
  return identity_ ? k : hashes_[rep](k);
}

cplx HashedLayer::weight(std::uint64_t rep, std::uint64_t i) const {
  switch (p_.weight) {
    case WeightKind::one: return 1.0;
    case WeightKind::sign: return double(weights_.sign(rep, i));
    case WeightKind::gaussian: return weights_.gaussian(rep, i);
    case WeightKind::phase: return std::polar(1.0, 2 * std::numbers::pi * weights_.uniform(rep, i));
  }
  return 0.0;
}

void HashedLayer::column(std::uint64_t i, std::vector<ColumnEntry>& out) const {
  const std::uint64_t k = key(i);
  for (std::uint64_t r = 0; r < p_.reps; ++r) out.push_back({r * p_.buckets + bucket_of_key(r, k), weight(r, i)});
}

cplx HashedLayer::entry(std::uint64_t row, std::uint64_t col) const {
  if (row >= rows() || col >= p_.n) throw std::out_of_range("HashedLayer::entry");
  const std::uint64_t r = row / p_.buckets, b = row % p_.buckets;
  const std::uint64_t k = (col >> p_.shift) & key_mask_;
  const std::uint64_t hb = identity_ ? k : hashes_[r].raw(k) % p_.buckets;
  return hb == b ? weight(r, col) : cplx{};
}

MaskedLayer::MaskedLayer(MaskedLayerParams p) : p_(std::move(p)) {
  if (p_.n == 0 || p_.pattern.empty()) throw std::invalid_argument("MaskedLayer: bad sizes");
  if (p_.buckets > 1 && p_.bucket_hash.buckets() != p_.buckets)
    throw std::invalid_argument("MaskedLayer: bucket hash range mismatch");
  SeededStream s(p_.seed, "masked:" + p_.name);
  mask_ = s.child("mask");
  w_ = s.child("w");
  xi_ = s.child("xi");
  sub_ = s.child("sub");
  tau_ = s.child("tau");
}

std::uint64_t MaskedLayer::bucket(std::uint64_t i) const { return p_.buckets > 1 ? p_.bucket_hash(i) : 0; }

std::vector<std::uint64_t> MaskedLayer::groups_of(std::uint64_t i) const {
  return bernoulli_column(mask_, i, p_.groups, p_.rate);
}

bool MaskedLayer::tau_is_i(std::uint64_t q, std::uint64_t i) const { return tau_.bits(q, i) & 1; }
bool MaskedLayer::xi(std::uint64_t q, std::uint64_t j, std::uint64_t i) const { return xi_.bernoulli(0.5, q, j, i); }
bool MaskedLayer::sub(std::uint64_t q, std::uint64_t j, std::uint64_t i) const {
  return sub_.bernoulli(p_.sub_rate, q, j, i);
}

cplx MaskedLayer::weight(std::uint64_t q, std::uint64_t j, std::uint64_t i) const {
  const cplx tau = tau_is_i(q, i) ? cplx(0, 1) : cplx(1, 0);
  switch (p_.pattern[j]) {
    case RowKind::one: return 1.0;
    case RowKind::sign: return double(w_.sign(q, j, i));
    case RowKind::gaussian: return w_.gaussian(q, j, i);
    case RowKind::xi_gauss: return xi(q, j, i) ? w_.gaussian(q, j, i) : 0.0;
    case RowKind::sub: return sub(q, j, i) ? 1.0 : 0.0;
    case RowKind::one_tau: return tau;
    case RowKind::sign_tau: return double(w_.sign(q, j, i)) * tau;
    case RowKind::sub_tau: return sub(q, j ? j - 1 : j, i) ? tau : cplx{};
  }
  return {};
}

void MaskedLayer::column(std::uint64_t i, std::vector<ColumnEntry>& out) const {
  const std::uint64_t b = bucket(i);
  const std::uint64_t R = p_.pattern.size();
  for_each_bernoulli(mask_, i, p_.groups, p_.rate, [&](std::uint64_t q) {
    for (std::uint64_t j = 0; j < R; ++j) {
      cplx w = weight(q, j, i);
      if (w != cplx{}) out.push_back({row_of(b, q, j), w});
    }
  });
}

cplx MaskedLayer::entry(std::uint64_t row, std::uint64_t col) const {
  if (row >= rows() || col >= p_.n) throw std::out_of_range("MaskedLayer::entry");
  const std::uint64_t R = p_.pattern.size();
  const std::uint64_t j = row % R, q = (row / R) % p_.groups, b = row / (R * p_.groups);
  if (p_.buckets > 1 && p_.bucket_hash.raw(col) % p_.buckets != b) return {};
  if (!bernoulli_entry(mask_, q, col, p_.groups, p_.rate)) return {};
  return weight(q, j, col);
}

}  // namespace cpr
