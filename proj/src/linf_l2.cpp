#include "cpr/linf_l2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cpr/phase.hpp"

namespace cpr {

Pivot::Pivot(std::uint64_t seed, double rate) : s_(seed, "pivot"), rate_(rate) {}

PivotLayer::PivotLayer(std::string name, std::size_t n, std::shared_ptr<const Pivot> pv)
    : name_(std::move(name)), n_(n), pv_(std::move(pv)) {}

void PivotLayer::column(std::uint64_t i, std::vector<ColumnEntry>& out) const {
  if (pv_->eta(i)) out.push_back({0, pv_->g(i)});
}

cplx PivotLayer::entry(std::uint64_t row, std::uint64_t col) const {
  if (row != 0 || col >= n_) throw std::out_of_range("PivotLayer::entry");
  return pv_->rho(col);
}

LinfRotatedLayer::LinfRotatedLayer(std::string name, std::size_t n, std::size_t B, double beta,
                                   std::shared_ptr<const Pivot> pv, std::uint64_t seed)
    : name_(std::move(name)), n_(n), B_(B), beta_(beta), pv_(std::move(pv)) {
  SeededStream s(seed, "linf:" + name_);
  h_ = HashFamily(s.child("h"), 0, 2, B_);
  s_ = s.child("sigma");
}

cplx LinfRotatedLayer::rotation(std::size_t l) const {
  return std::polar(1.0, beta_ * double(l & 1) + std::numbers::pi / 2 * double(l >> 1));
}

void LinfRotatedLayer::column(std::uint64_t i, std::vector<ColumnEntry>& out) const {
  if (pv_->eta(i)) {
    const double g = pv_->g(i);
    for (std::size_t l = 0; l < 4; ++l) {
      const cplx w = rotation(l) * g;
      for (std::size_t b = 0; b < B_; ++b) out.push_back({l * B_ + b, w});
    }
    return;
  }
  const std::size_t b = h_(i);
  const double s = s_.sign(i);
  for (std::size_t l = 0; l < 4; ++l) out.push_back({l * B_ + b, s});
}

cplx LinfRotatedLayer::entry(std::uint64_t row, std::uint64_t col) const {
  if (row >= rows() || col >= n_) throw std::out_of_range("LinfRotatedLayer::entry");
  const std::size_t l = row / B_, b = row % B_;
  const double eta = pv_->eta(col) ? 1.0 : 0.0;
  cplx v = rotation(l) * (eta * pv_->g(col));
  if (h_.raw(col) % B_ == b) v += (1.0 - eta) * double(s_.sign(col));
  return v;
}

LinfEnsemble::LinfEnsemble(LinfParams p, const Constants& c) : p_(std::move(p)), c_(c) {
  if (p_.n == 0 || p_.k == 0 || p_.k > p_.n) throw ConfigError("linf: need 1 <= k <= n");
  if (p_.P.phases.empty()) throw ConfigError("linf: empty phase set");
  const auto& lc = c_.linf;
  const double cc = c_.phase.c;
  eps_ = p_.eps > 0 ? p_.eps : std::min(p_.P.eta / (5 * cc), std::numbers::pi / (9 * cc));
  if (!(2 * cc * eps_ < p_.P.eta / 2)) throw ConfigError("linf: 2 c eps must be below eta / 2");
  const double k = double(p_.k);
  B_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lc.c_B * k / eps_)));
  const auto R = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lc.c_R * log2_or_one(double(p_.n)))));

  hh_ = std::make_unique<HeavyHitters>(p_.n, p_.k, c_.sketch, mix64(p_.seed ^ 0x11), "hh");
  const auto K = static_cast<std::uint64_t>(std::ceil(lc.C_cs * k / eps_));
  cs_ = std::make_unique<CountSketch>(p_.n, K, cs_default_reps(p_.n, c_.sketch), c_.sketch.cs_bucket_mult,
                                      mix64(p_.seed ^ 0x22), "cs");
  pivot_ = std::make_shared<Pivot>(mix64(p_.seed ^ 0x33), 1.0 / (lc.C0 * k));
  stack_.append(hh_->stack());
  stack_.add(cs_->layer());
  stack_.add(std::make_shared<PivotLayer>("rho", p_.n, pivot_));
  for (std::size_t r = 0; r < R; ++r) {
    phis_.push_back(std::make_shared<LinfRotatedLayer>("phi:" + std::to_string(r), p_.n, B_, 2 * cc * eps_, pivot_,
                                                       mix64(p_.seed ^ (0x1000 + r))));
    stack_.add(phis_.back());
  }
  NoiselessParams np;
  np.n = p_.n;
  np.k = std::min<std::size_t>(p_.n, static_cast<std::size_t>(std::ceil(lc.C2 * k)));
  np.seed = mix64(p_.seed ^ 0x44);
  np.prefix = "nl";
  nl_ = std::make_unique<NoiselessEnsemble>(np, c_);
  stack_.append(nl_->stack());
}

PhaselessMeasurements linf_measure(const LinfEnsemble& ens, const ComplexSignal& x) { return ens.stack().measure(x); }

double compute_L(std::span<const double> rho_layer) {
  if (rho_layer.size() != 1) throw std::invalid_argument("compute_L: pivot layer has one row");
  return rho_layer[0];
}

bool reproduces(const LayerStack& stack, const PhaselessMeasurements& y, const SparseApprox& xhat) {
  auto yh = stack.measure(xhat.to_dense());
  if (yh.values.size() != y.values.size()) return false;
  double scale = 0.0, err = 0.0;
  for (std::size_t j = 0; j < y.values.size(); ++j) {
    scale = std::max(scale, y.values[j]);
    err = std::max(err, std::abs(y.values[j] - yh.values[j]));
  }
  return err <= 1e-9 * std::max(scale, 1e-300);
}

LinfResult linf_decode(const PhaselessMeasurements& y, const LinfEnsemble& ens) {
  LinfResult res;
  auto& d = res.diag;
  const auto& P = ens.params().P;
  const std::size_t n = ens.params().n;
  res.xhat.n = n;

  d.S = ens.hh().identify(y);
  auto ycs = y.layer(ens.cs().hashed().name());
  for (Index i : d.S) d.magnitudes.push_back(ens.cs().point_query(ycs, i));
  d.L = compute_L(y.layer("rho"));
  for (std::size_t j = 0; j < d.S.size(); ++j)
    if (d.magnitudes[j] >= d.L && d.magnitudes[j] > 0) d.S_prime.push_back(d.S[j]);

  if (d.L == 0.0 || ens.constants().linf.certify) {
    auto nr = noiseless_decode(y, ens.noiseless());
    if (d.L == 0.0) {
      d.branch = "noiseless";
      d.ok = nr.diag.ok;
      d.reason = nr.diag.reason;
      if (nr.diag.ok) res.xhat = std::move(nr.xhat);
      return res;
    }
    if (nr.diag.ok && reproduces(ens.stack(), y, nr.xhat)) {
      d.branch = "certified";
      d.ok = true;
      res.xhat = std::move(nr.xhat);
      return res;
    }
  }
  d.branch = "phase";
  if (d.S_prime.empty()) {
    d.ok = true;
    return res;
  }

  const std::size_t m = d.S_prime.size();
  std::vector<double> mag(m);
  for (std::size_t j = 0; j < m; ++j)
    mag[j] = d.magnitudes[std::lower_bound(d.S.begin(), d.S.end(), d.S_prime[j]) - d.S.begin()];
  std::vector<std::vector<double>> est(m);
  const double eps = ens.eps();
  const auto& pc = ens.constants().phase;
  const bool offset = ens.constants().linf.offset_fit;
  for (std::size_t r = 0; r < ens.R(); ++r) {
    const auto& phi = ens.phi(r);
    auto yr = y.layer(phi.name());
    const std::size_t B = phi.buckets();
    std::vector<std::size_t> b(m), cnt;
    for (std::size_t j = 0; j < m; ++j) b[j] = phi.bucket(d.S_prime[j]);
    auto sorted = b;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < m; ++j) {
      auto range = std::equal_range(sorted.begin(), sorted.end(), b[j]);
      if (range.second - range.first != 1) continue;
      std::array<std::array<double, 2>, 2> s;
      for (std::size_t l = 0; l < 4; ++l) s[l & 1][l >> 1] = yr[l * B + b[j]];
      PhaseEstimate e;
      try {
        e = offset ? estimate_full_phase_offset(s, eps, pc) : estimate_full_phase(mag[j], d.L, s, eps, pc);
      } catch (const DegenerateMagnitude&) {
        continue;
      }
      if (offset && e.out_of_range) continue;
      // e.theta ~ arg<rho,x> - arg(sigma x_i)
      double t = wrap_phase(-e.theta + (phi.sign(d.S_prime[j]) < 0 ? std::numbers::pi : 0.0));
      est[j].push_back(t);
    }
  }
  d.theta_tilde.assign(m, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < m; ++j) {
    if (est[j].empty()) {
      ++d.dropped;
      continue;
    }
    d.theta_tilde[j] = circular_median(est[j]);
    keep.push_back(j);
  }
  if (keep.empty()) {
    d.ok = false;
    d.reason = "no element of S' was isolated";
    return res;
  }
  std::size_t i0 = keep[0];
  for (auto j : keep)
    if (mag[j] > mag[i0]) i0 = j;
  for (double p : P.phases) {
    bool accept = true;
    std::vector<std::pair<Index, cplx>> pairs;
    for (auto j : keep) {
      const double th = wrap_phase(p + d.theta_tilde[j] - d.theta_tilde[i0]);
      auto [q, dist] = round_to_phase_set(th, P);
      if (dist > P.eta / 2 + 1e-12) {
        accept = false;
        break;
      }
      pairs.push_back({d.S_prime[j], std::polar(mag[j], q)});
    }
    if (accept) {
      d.p = p;
      d.ok = true;
      res.xhat = SparseApprox::from_pairs(n, std::move(pairs));
      return res;
    }
  }
  d.ok = false;
  d.reason = "rotation alignment failed for every p in P";
  return res;
}

LinfParams linf_corollary_params(std::size_t n, std::size_t k, const PhaseSet& P, std::uint64_t seed,
                                 const Constants& c) {
  LinfParams p;
  p.n = n;
  p.P = P;
  p.seed = seed;
  const double cc = c.phase.c;
  const double eps = std::min(P.eta / (5 * cc), std::numbers::pi / (9 * cc));
  p.k = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(double(k) / std::min(P.eta, eps))));
  return p;
}

}  // namespace cpr
