#include "cpr/sketches.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace cpr {

std::uint64_t ceil_log2(std::uint64_t n) { return n <= 1 ? 0 : std::bit_width(n - 1); }

double log2_or_one(double v) { return std::max(1.0, std::log2(std::max(v, 1.0))); }

std::uint64_t cs_default_reps(std::uint64_t n, const SketchConstants& sc) {
  auto r = static_cast<std::uint64_t>(std::ceil(sc.cs_reps_per_log * log2_or_one(double(n))));
  return std::max<std::uint64_t>(1, r | 1);
}

namespace {

double median_inplace(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  if (v.size() % 2) return v[m];
  const double hi = v[m];
  const double lo = *std::max_element(v.begin(), v.begin() + m);
  return 0.5 * (lo + hi);
}

}  // namespace

CountSketch::CountSketch(std::uint64_t n, std::uint64_t K, std::uint64_t reps, double bucket_mult,
                         std::uint64_t seed, std::string name)
    : K_(std::max<std::uint64_t>(1, K)) {
  HashedLayerParams p;
  p.name = std::move(name);
  p.n = n;
  p.reps = std::max<std::uint64_t>(1, reps);
  p.buckets = std::max<std::uint64_t>(2 * K_, static_cast<std::uint64_t>(std::ceil(bucket_mult * double(K_))));
  p.weight = WeightKind::sign;
  p.seed = seed;
  layer_ = std::make_shared<HashedLayer>(p);
}

LayerStack CountSketch::stack() const {
  LayerStack s;
  s.add(layer_);
  return s;
}

double CountSketch::point_query(std::span<const double> y, Index i) const {
  const auto& p = layer_->params();
  if (y.size() != layer_->rows()) throw std::invalid_argument("cs_point_query: layer size mismatch");
  std::vector<double> v(p.reps);
  for (std::uint64_t r = 0; r < p.reps; ++r) v[r] = y[r * p.buckets + layer_->bucket(r, i)];
  return median_inplace(v);
}

HeavyHitters::HeavyHitters(std::uint64_t n, std::uint64_t K, const SketchConstants& sc, std::uint64_t seed,
                           std::string prefix)
    : n_(n), K_(std::max<std::uint64_t>(1, K)), prefix_(std::move(prefix)) {
  if (n == 0) throw std::invalid_argument("HeavyHitters: n = 0");
  beam_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(sc.hh_beam_mult * double(K_))));
  bits_ = ceil_log2(n);
  first_level_ = std::min(bits_, ceil_log2(beam_));
  const auto width = std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::ceil(sc.hh_bucket_mult * double(K_))));
  for (std::uint64_t l = first_level_; l <= bits_; ++l) {
    HashedLayerParams p;
    p.name = prefix_ + ":" + std::to_string(l);
    p.n = n;
    p.reps = std::max<std::uint64_t>(1, sc.hh_reps);
    p.shift = static_cast<unsigned>(bits_ - l);
    p.key_space = ((n - 1) >> p.shift) + 1;
    p.buckets = std::min(p.key_space, width);
    p.weight = sc.hh_weight;
    p.seed = seed;
    levels_.push_back(std::make_shared<HashedLayer>(p));
    stack_.add(levels_.back());
  }
}

std::vector<Index> HeavyHitters::identify(const PhaselessMeasurements& y) const {
  std::vector<std::uint64_t> cand;
  std::vector<std::pair<double, std::uint64_t>> scored;
  std::vector<double> v;
  for (std::size_t li = 0; li < levels_.size(); ++li) {
    const auto& L = *levels_[li];
    const auto& p = L.params();
    auto yl = y.layer(p.name);
    if (li == 0) {
      cand.resize(p.key_space);
      for (std::uint64_t c = 0; c < p.key_space; ++c) cand[c] = c;
    } else {
      std::vector<std::uint64_t> next;
      for (auto c : cand)
        for (std::uint64_t b = 0; b < 2; ++b)
          if (2 * c + b < p.key_space) next.push_back(2 * c + b);
      cand.swap(next);
    }
    scored.clear();
    for (auto c : cand) {
      v.resize(p.reps);
      for (std::uint64_t r = 0; r < p.reps; ++r) v[r] = yl[r * p.buckets + L.bucket_of_key(r, c)];
      const double est = median_inplace(v);
      if (est > 0.0) scored.push_back({est, c});
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (scored.size() > beam_) scored.resize(beam_);
    cand.clear();
    for (const auto& s : scored) cand.push_back(s.second);
  }
  std::vector<Index> out;
  for (auto c : cand)
    if (c < n_) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

CountMin::CountMin(std::uint64_t n, unsigned shift, unsigned bits, std::uint64_t k, double eps,
                   const SketchConstants& sc, std::uint64_t seed, std::string name)
    : k_(std::max<std::uint64_t>(1, k)), eps_(eps), bits_(bits) {
  if (!(eps > 0.0)) throw ConfigError("CountMin: eps must be positive");
  const double kk = double(k_);
  HashedLayerParams p;
  p.name = std::move(name);
  p.n = n;
  p.shift = shift;
  p.key_space = std::uint64_t{1} << bits;
  const auto width = static_cast<std::uint64_t>(std::ceil(sc.cm_width_mult * kk / eps));
  p.buckets = std::min(p.key_space, std::max<std::uint64_t>(1, width));
  p.reps = p.buckets == p.key_space
               ? 1
               : std::max<std::uint64_t>(
                     1, static_cast<std::uint64_t>(std::ceil(sc.cm_reps_per_log *
                                                             log2_or_one(eps * double(p.key_space) / kk))));
  p.weight = WeightKind::one;
  p.seed = seed;
  layer_ = std::make_shared<HashedLayer>(p);
  cap_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(sc.cm_cap_mult * kk / eps)));
}

double CountMin::tail_estimate(std::span<const double> y) const {
  const auto& p = layer_->params();
  std::vector<double> per_rep(p.reps), row;
  for (std::uint64_t r = 0; r < p.reps; ++r) {
    row.assign(y.begin() + r * p.buckets, y.begin() + (r + 1) * p.buckets);
    double total = 0.0;
    for (double v : row) total += v;
    const std::size_t top = std::min<std::size_t>(k_, row.size());
    std::partial_sort(row.begin(), row.begin() + top, row.end(), std::greater<>());
    double head = 0.0;
    for (std::size_t j = 0; j < top; ++j) head += row[j];
    per_rep[r] = std::max(0.0, total - head);
  }
  return median_inplace(per_rep);
}

double CountMin::min_estimate(std::span<const double> y, std::uint64_t key) const {
  const auto& p = layer_->params();
  double m = INFINITY;
  for (std::uint64_t r = 0; r < p.reps; ++r) m = std::min(m, y[r * p.buckets + layer_->bucket_of_key(r, key)]);
  return m;
}

std::vector<std::uint64_t> CountMin::identify(std::span<const double> y,
                                              const std::vector<std::uint64_t>& candidates) const {
  if (y.size() != layer_->rows()) throw std::invalid_argument("cm_identify: layer size mismatch");
  if (candidates.empty()) return {};
  const double thr = eps_ / double(k_) * tail_estimate(y);
  std::vector<std::pair<double, std::uint64_t>> kept;
  for (auto c : candidates) {
    if (c >= key_space()) throw std::out_of_range("cm_identify: candidate outside key space");
    const double e = min_estimate(y, c);
    if (e > thr) kept.push_back({e, c});
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (kept.size() > cap_) kept.resize(cap_);
  std::vector<std::uint64_t> out;
  for (const auto& e : kept) out.push_back(e.second);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PhaselessMeasurements cs_measure(const CountSketch& cs, const ComplexSignal& x) { return cs.stack().measure(x); }

double cs_point_query(const PhaselessMeasurements& y, const CountSketch& cs, Index i) {
  return cs.point_query(y.layer(cs.hashed().name()), i);
}

PhaselessMeasurements hh_measure(const HeavyHitters& hh, const ComplexSignal& x) { return hh.stack().measure(x); }

std::vector<Index> hh_identify(const PhaselessMeasurements& y, const HeavyHitters& hh) { return hh.identify(y); }

std::vector<std::uint64_t> cm_identify(std::span<const double> y, const CountMin& cm,
                                       const std::vector<std::uint64_t>& candidates) {
  return cm.identify(y, candidates);
}

void require_nonnegative(const ComplexSignal& x) {
  for (std::size_t i = 0; i < x.n(); ++i)
    if (x[i].imag() != 0.0 || x[i].real() < 0.0)
      throw ContractViolation("signal entry " + std::to_string(i) + " is not a nonnegative real");
}

}  // namespace cpr
