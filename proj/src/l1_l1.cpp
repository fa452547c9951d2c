#include "cpr/l1_l1.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

namespace cpr {

std::uint64_t bit_split(Index i, std::uint64_t n, Half h) {
  if (n == 0 || !std::has_single_bit(n)) throw ConfigError("bit_split: n must be a power of two");
  if (i >= n) throw std::out_of_range("bit_split: index outside [n]");
  const unsigned L = unsigned(std::countr_zero(n));
  const unsigned low = L - (L + 1) / 2;
  return h == Half::first ? i >> low : i & ((std::uint64_t{1} << low) - 1);
}

BitSplitTree::BitSplitTree(std::uint64_t n, std::uint64_t k, double eps, const SketchConstants& sc,
                           std::uint64_t seed)
    : n_(n), k_(std::max<std::uint64_t>(1, k)), eps_(eps), sc_(sc), seed_(seed) {
  if (n == 0 || !std::has_single_bit(n)) throw ConfigError("l1: n must be a power of two");
  leaf_limit_ = std::max<std::uint64_t>(64, k_ * k_);
  build(0, unsigned(std::countr_zero(n)), 0);
  for (const auto& nd : nodes_) stack_.add(nd.cm->layer());
}

std::size_t BitSplitTree::build(unsigned shift, unsigned bits, std::size_t depth) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({});
  nodes_[id].shift = shift;
  nodes_[id].bits = bits;
  nodes_[id].depth = depth;
  nodes_[id].cm = std::make_shared<CountMin>(n_, shift, bits, k_, eps_, sc_, mix64(seed_ ^ (id * 0x9e37 + 1)),
                                             "cm:" + std::to_string(shift) + ":" + std::to_string(bits));
  if ((std::uint64_t{1} << bits) > leaf_limit_ && bits > 1) {
    const unsigned hi = (bits + 1) / 2, lo = bits - hi;
    const int f = int(build(shift + lo, hi, depth + 1));
    const int s = int(build(shift, lo, depth + 1));
    nodes_[id].first = f;
    nodes_[id].sec = s;
  }
  return id;
}

std::size_t BitSplitTree::depth() const {
  std::size_t d = 0;
  for (const auto& nd : nodes_) d = std::max(d, nd.depth);
  return d;
}

std::vector<std::uint64_t> BitSplitTree::identify(const PhaselessMeasurements& y, std::size_t id) const {
  const auto& nd = nodes_.at(id);
  std::vector<std::uint64_t> cand;
  if (nd.first < 0) {
    cand.resize(std::size_t{1} << nd.bits);
    for (std::size_t c = 0; c < cand.size(); ++c) cand[c] = c;
  } else {
    const auto a = identify(y, std::size_t(nd.first));
    const auto b = identify(y, std::size_t(nd.sec));
    const unsigned lo = nodes_[std::size_t(nd.sec)].bits;
    cand.reserve(a.size() * b.size());
    for (auto u : a)
      for (auto v : b) cand.push_back((u << lo) | v);
  }
  return nd.cm->identify(y.layer(nd.cm->hashed().name()), cand);
}

L1Ensemble::L1Ensemble(L1Params p, const Constants& c) : p_(p), c_(c) {
  if (p_.k == 0 || p_.k > p_.n) throw ConfigError("l1: need 1 <= k <= n");
  if (!(p_.eps > 0 && p_.eps <= 1)) throw ConfigError("l1: eps must be in (0, 1]");
  tree_ = std::make_unique<BitSplitTree>(p_.n, p_.k, p_.eps, c_.sketch, mix64(p_.seed ^ 0x4c31));
  HashedLayerParams hp;
  hp.name = "est";
  hp.n = p_.n;
  hp.reps = std::max<std::uint64_t>(1, std::uint64_t(std::ceil(c_.l1.est_d_per_log * log2_or_one(double(p_.n))))) | 1;
  hp.buckets = std::max<std::uint64_t>(1, std::uint64_t(std::ceil(c_.l1.est_width_mult * double(p_.k) /
                                                                  (p_.eps * p_.eps))));
  hp.key_space = p_.n;
  hp.weight = WeightKind::one;
  hp.seed = mix64(p_.seed ^ 0x4c32);
  est_ = std::make_shared<HashedLayer>(hp);
  stack_.append(tree_->stack());
  stack_.add(est_);
}

std::size_t L1Ensemble::rounds() const {
  return c_.l1.rounds ? c_.l1.rounds : ceil_log2(p_.k) + 2;
}

PhaselessMeasurements l1_measure(const L1Ensemble& ens, const ComplexSignal& x) {
  require_nonnegative(x);
  return ens.stack().measure(x);
}

std::vector<Index> l1_identify(const PhaselessMeasurements& y, const L1Ensemble& ens) {
  auto keys = ens.tree().identify(y);
  return {keys.begin(), keys.end()};
}

namespace {

double median_of(std::vector<double>& v) {
  auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

L1Result l1_decode(const PhaselessMeasurements& y, const L1Ensemble& ens) {
  L1Result res;
  const auto& est = ens.estimator();
  const std::size_t d = est.params().reps, w = est.params().buckets;
  const auto cand = l1_identify(y, ens);
  res.diag.candidates = cand.size();
  const auto yest = y.layer(est.name());

  std::map<Index, double> xh, best;
  std::vector<double> r(yest.begin(), yest.end()), tmp(d);
  // per-rep l1 mass of the residual counters, median over reps
  auto mass = [&]() {
    for (std::size_t rep = 0; rep < d; ++rep) {
      double s = 0;
      for (std::size_t b = 0; b < w; ++b) s += std::abs(r[rep * w + b]);
      tmp[rep] = s;
    }
    return median_of(tmp);
  };
  double best_mass = mass();
  res.diag.residual.push_back(best_mass);

  const std::size_t k = ens.params().k;
  for (std::size_t t = 0; t < ens.rounds(); ++t) {
    std::vector<std::pair<double, Index>> upd;
    for (Index i : cand) {
      for (std::size_t rep = 0; rep < d; ++rep) tmp[rep] = r[rep * w + est.bucket(rep, i)];
      const double e = median_of(tmp);
      const double cur = xh.count(i) ? xh[i] : 0.0;
      const double delta = std::max(0.0, cur + e) - cur;
      if (delta != 0.0) upd.push_back({delta, i});
    }
    const std::size_t budget = std::max<std::size_t>(1, (k + (std::size_t{1} << t) - 1) >> t);
    std::sort(upd.begin(), upd.end(), [](const auto& a, const auto& b) {
      return std::abs(a.first) != std::abs(b.first) ? std::abs(a.first) > std::abs(b.first) : a.second < b.second;
    });
    if (upd.size() > budget) upd.resize(budget);
    if (upd.empty()) break;
    for (auto [delta, i] : upd) {
      xh[i] += delta;
      for (std::size_t rep = 0; rep < d; ++rep) r[rep * w + est.bucket(rep, i)] -= delta;
    }
    const double m = mass();
    res.diag.residual.push_back(m);
    if (m > best_mass) {
      res.diag.stopped_early = true;
      break;
    }
    best_mass = m;
    best = xh;
    res.diag.best_round = t + 1;
  }
  std::vector<std::pair<Index, cplx>> out;
  for (auto [i, v] : best)
    if (v > 0) out.push_back({i, v});
  res.xhat = SparseApprox::from_pairs(ens.params().n, std::move(out));
  return res;
}

}  // namespace cpr
