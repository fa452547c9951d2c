#include "cpr/l2_l2.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "json.hpp"

namespace cpr {

namespace {

std::size_t ceil_pos(double v) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v - 1e-9))); }

double log_k_of(double v, std::size_t k) {
  return k <= 2 ? std::log2(v) : std::log(v) / std::log(double(k));
}

std::size_t nearest_index(double theta, const PhaseSet& D) {
  std::size_t best = 0;
  double bd = circ_dist(theta, D.phases[0]);
  for (std::size_t j = 1; j < D.size(); ++j) {
    double d = circ_dist(theta, D.phases[j]);
    if (d < bd - 1e-12) {
      bd = d;
      best = j;
    }
  }
  return best;
}

// All pairwise differences of P, merged within 1e-9.
PhaseSet difference_set(const PhaseSet& P) {
  std::vector<double> d;
  for (double a : P.phases)
    for (double b : P.phases) {
      double v = wrap_phase(a - b);
      if (std::none_of(d.begin(), d.end(), [&](double w) { return circ_dist(v, w) < 1e-9; })) d.push_back(v);
    }
  return PhaseSet::from_list(d);
}

// Rounded relative phase of a pair from rotated sums, or -1 when the estimate cannot
// tell theta from -theta on D.
long rounded_relative(double au, double av, const std::vector<RotatedSum>& rows, double eps, const PhaseSet& D,
                      const PhaseConstants& pc) {
  if (rows.empty() || !(au > 0) || !(av > 0)) return -1;
  PhaseEstimate e = fit_relative_phase(au, av, rows, eps, pc);
  std::size_t a = nearest_index(e.theta, D);
  if (e.mode == PhaseMode::unsigned_angle && nearest_index(wrap_phase(-e.theta), D) != a) return -1;
  return long(a);
}

// Plurality over integer labels, ties to the smaller label.
long plurality(const std::vector<long>& labels) {
  std::map<long, std::size_t> cnt;
  for (long v : labels)
    if (v >= 0) ++cnt[v];
  long best = -1;
  std::size_t bc = 0;
  for (auto [v, c] : cnt)
    if (c > bc) {
      best = v;
      bc = c;
    }
  return best;
}

// (group q, member position) pairs sorted by q
template <class Groups>
std::vector<std::pair<std::uint64_t, std::size_t>> group_members(std::size_t count, Groups&& groups_of) {
  std::vector<std::pair<std::uint64_t, std::size_t>> qa;
  for (std::size_t a = 0; a < count; ++a)
    for (std::uint64_t q : groups_of(a)) qa.push_back({q, a});
  std::sort(qa.begin(), qa.end());
  return qa;
}

double arg_ratio(cplx wv, cplx wu) { return std::arg(wv / wu); }

}  // namespace

L2Ensemble::L2Ensemble(L2Params p, const Constants& c) : p_(std::move(p)), c_(c) {
  if (p_.n == 0 || p_.k == 0 || p_.k > p_.n) throw ConfigError("l2: need 1 <= k <= n");
  if (p_.P.phases.empty()) throw ConfigError("l2: empty phase set");
  if (!(p_.eps > 0 && p_.eps <= 1)) throw ConfigError("l2: eps must be in (0, 1]");
  if (!(p_.delta > 0 && p_.delta < 1)) throw ConfigError("l2: delta must be in (0, 1)");
  const auto& lc = c_.l2;
  const double k = double(p_.k);
  eta_ = std::min(p_.P.eta, std::numbers::pi);
  D_ = difference_set(p_.P);
  complex_ = std::any_of(D_.phases.begin(), D_.phases.end(), [](double d) {
    return circ_dist(d, 0.0) > 1e-9 && circ_dist(d, std::numbers::pi) > 1e-9;
  });
  C2k_ = std::min<std::size_t>(p_.n, ceil_pos(lc.C2 * k));
  lambda_ = log2_or_one(double(C2k_));
  Lmax_ = std::max<std::size_t>(1, ceil_log2(C2k_));
  Dmax_ = std::max<std::size_t>(lc.min_reps, ceil_pos(log2_or_one(k) / 4) * ceil_pos(log_k_of(2 / p_.delta, p_.k)) + 1);

  SeededStream s(p_.seed, "l2");
  hh_ = std::make_unique<HeavyHitters>(p_.n, ceil_pos(lc.C_hh * k / p_.eps), c_.sketch, s.child("hh").key(), "hh");
  cs_ = std::make_unique<CountSketch>(p_.n, ceil_pos(lc.C_cs * k / p_.eps), cs_default_reps(p_.n, c_.sketch),
                                      c_.sketch.cs_bucket_mult, s.child("cs").key(), "cs");
  stack_.append(hh_->stack());
  stack_.add(cs_->layer());

  for (std::size_t t = 1; t <= C2k_; ++t) {
    MaskedLayerParams mp;
    mp.name = "ca:" + std::to_string(t);
    mp.n = p_.n;
    mp.groups = lc.ca_rows;
    mp.rate = std::min(1.0, 1.0 / (lc.C_L * double(t)));
    mp.pattern = {RowKind::gaussian};
    mp.seed = s.child("ca").key();
    approx_.push_back(std::make_shared<MaskedLayer>(mp));
    stack_.add(approx_.back());
  }

  const double en2 = p_.eps * eta2();
  const auto indep = kwise_degree(c_.noiseless.hash_alpha, p_.k);
  for (std::size_t l = 1; l <= Lmax_; ++l) {
    const double g = lambda_ - double(l) + 2;
    for (std::size_t r = 0; r < Dmax_; ++r) {
      L2Block b;
      b.l = l;
      b.r = r;
      b.buckets = buckets_for_level(l);
      b.rho = rho_for_level(l);
      b.Q = Q_for_level(l);
      b.rel_rate = std::min(0.5, en2 / (lc.C_B * double(l) * g * g));
      b.comb_rate = std::min(0.5, lc.C_pc * en2 * std::ldexp(1.0, -int(l)) / (g * g));
      b.noise_rows = ceil_pos(lc.C_noise * double(l));
      b.phase_rows = ceil_pos(lc.C_phase * double(l));
      b.hash = HashFamily(s.child("h"), l * 1024 + r, indep, b.buckets);
      const std::string tag = std::to_string(l) + ":" + std::to_string(r);

      MaskedLayerParams rp;
      rp.name = "rp:" + tag;
      rp.n = p_.n;
      rp.groups = b.rho;
      rp.rate = b.rel_rate;
      rp.pattern = complex_ ? std::vector<RowKind>{RowKind::sign, RowKind::sign_tau} : std::vector<RowKind>{RowKind::sign};
      rp.buckets = b.buckets;
      rp.bucket_hash = b.hash;
      rp.seed = s.child("rp").key();
      b.rel = std::make_shared<MaskedLayer>(rp);

      MaskedLayerParams cp;
      cp.name = "cb:" + tag;
      cp.n = p_.n;
      cp.groups = b.Q;
      cp.rate = b.comb_rate;
      cp.pattern.assign(b.noise_rows, RowKind::xi_gauss);
      for (std::size_t j = 0; j < b.phase_rows; ++j) {
        cp.pattern.push_back(RowKind::sub);
        if (complex_) cp.pattern.push_back(RowKind::sub_tau);
      }
      cp.sub_rate = 1.0 / lc.C_dd;
      cp.seed = s.child("cb").key();
      b.comb = std::make_shared<MaskedLayer>(cp);

      stack_.add(b.rel);
      stack_.add(b.comb);
      blocks_.push_back(std::move(b));
    }
  }
}

std::size_t L2Ensemble::buckets_for_level(std::size_t l) const {
  return ceil_pos(std::ldexp(1.0, int(l)) / (c_.l2.c_bucket * double(l)));
}

std::size_t L2Ensemble::rho_for_level(std::size_t l) const {
  const double g = lambda_ - double(l) + 2;
  return ceil_pos(c_.l2.C_rho / (p_.eps * p_.eps * eta2()) * double(l * l) * std::pow(g, 4));
}

std::size_t L2Ensemble::Q_for_level(std::size_t l) const {
  const double g = lambda_ - double(l) + 2;
  return ceil_pos(c_.l2.C_Q / (p_.eps * p_.eps * eta2()) * std::ldexp(1.0, int(l)) * std::pow(g, 4));
}

std::size_t L2Ensemble::reps_for(std::size_t T) const {
  const double a = std::ceil(log2_or_one(double(p_.k)) / (4 * log2_or_one(double(T))));
  const auto d = static_cast<std::size_t>(std::ceil(a * log_k_of(2 / p_.delta, p_.k) - 1e-9));
  return std::clamp<std::size_t>(d, c_.l2.min_reps, Dmax_);
}

double compute_approx(std::span<const double> layer) {
  if (layer.empty()) return 0.0;
  std::vector<double> sq(layer.begin(), layer.end());
  for (auto& v : sq) v *= v;
  auto mid = sq.begin() + sq.size() / 2;
  std::nth_element(sq.begin(), mid, sq.end());
  return *mid;
}

PruneResult prune(const std::vector<Index>& S, const std::vector<double>& mags, const std::vector<double>& L,
                  double eps, double C0, double log_C2k) {
  if (S.size() != mags.size()) throw std::invalid_argument("prune: S and magnitudes differ in length");
  PruneResult res;
  std::vector<std::size_t> ord(S.size());
  for (std::size_t a = 0; a < ord.size(); ++a) ord[a] = a;
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
    return mags[a] != mags[b] ? mags[a] > mags[b] : S[a] < S[b];
  });
  const std::size_t top = std::min(S.size(), L.size());
  for (std::size_t m = top; m >= 1; --m) {
    const double z = mags[ord[m - 1]];
    const double g = log_C2k - double(ceil_log2(m)) + 2;
    const double thr = eps / (C0 * g * g) * L[m - 1];
    if (z * z > thr) {
      res.threshold = z;
      for (std::size_t a = 0; a < S.size(); ++a)
        if (mags[a] >= z) res.T.push_back(S[a]);
      std::sort(res.T.begin(), res.T.end());
      res.l0 = ceil_log2(res.T.size());
      break;
    }
  }
  return res;
}

std::vector<std::size_t> canonical_pattern(const std::vector<double>& phase, const PhaseSet& D) {
  std::vector<std::size_t> p(phase.size());
  for (std::size_t a = 0; a < phase.size(); ++a) p[a] = nearest_index(wrap_phase(phase[a] - phase[0]), D);
  return p;
}

std::uint64_t pattern_hash(const std::vector<std::size_t>& pattern) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : pattern) h = mix64(h ^ v);
  return h;
}

namespace {

// most frequent pattern, ties to the lowest hash
const std::vector<std::size_t>* vote(const std::vector<std::vector<std::size_t>>& pats, std::size_t* votes) {
  std::map<std::vector<std::size_t>, std::size_t> cnt;
  for (const auto& p : pats) ++cnt[p];
  const std::vector<std::size_t>* best = nullptr;
  std::size_t bc = 0;
  std::uint64_t bh = 0;
  for (const auto& [p, c] : cnt) {
    auto h = pattern_hash(p);
    if (c > bc || (c == bc && h < bh)) {
      best = &p;
      bc = c;
      bh = h;
    }
  }
  if (votes) *votes = bc;
  if (!best) return nullptr;
  for (const auto& p : pats)
    if (p == *best) return &p;
  return nullptr;
}

}  // namespace

BucketPhases rel_phases_in_bucket(std::span<const double> y_block, const L2Block& blk, std::size_t bucket,
                                  const std::vector<Index>& members, const std::vector<double>& mags,
                                  const PhaseSet& D, const Constants& c) {
  BucketPhases res;
  const std::size_t nb = members.size();
  res.phase.assign(nb, 0.0);
  if (nb <= 1) {
    res.ok = true;
    return res;
  }
  const auto& L = *blk.rel;
  const std::size_t R = L.params().pattern.size();
  auto qa = group_members(nb, [&](std::size_t a) { return L.groups_of(members[a]); });

  std::vector<PhaseSample> samples;
  for (std::size_t s = 0; s < qa.size();) {
    std::size_t e = s;
    while (e < qa.size() && qa[e].first == qa[s].first) ++e;
    if (e - s == 2) {
      ++res.good;
      const std::uint64_t q = qa[s].first;
      const std::size_t a = qa[s].second, b = qa[s + 1].second;
      std::vector<RotatedSum> rows;
      for (std::size_t j = 0; j < R; ++j)
        rows.push_back({arg_ratio(L.weight(q, j, members[b]), L.weight(q, j, members[a])),
                        y_block[L.row_of(bucket, q, j)]});
      long d = rounded_relative(mags[a], mags[b], rows, 0.0, D, c.phase);
      if (d >= 0) samples.push_back({a, b, D.phases[std::size_t(d)]});
    }
    s = e;
  }
  if (samples.empty()) {
    res.reason = "no good group in bucket";
    return res;
  }
  const std::size_t l = blk.l;
  const std::size_t G = ceil_pos(c.l2.c_sp * double(l) * double(std::max<std::uint64_t>(1, ceil_log2(l))));
  const std::size_t ng = std::max<std::size_t>(1, samples.size() / G);
  PhasePredictionOptions opt;
  opt.grid = D;
  std::vector<std::vector<std::size_t>> pats;
  for (std::size_t g = 0; g < ng; ++g) {
    const std::size_t lo = g * G, hi = g + 1 == ng ? samples.size() : lo + G;
    std::vector<PhaseSample> part(samples.begin() + lo, samples.begin() + hi);
    auto asg = solve_phase_prediction(nb, part, opt);
    if (asg.ok) pats.push_back(canonical_pattern(asg.phase, D));
  }
  res.groups = ng;
  res.solved = pats.size();
  const auto* best = vote(pats, nullptr);
  if (!best) {
    res.reason = "phase prediction failed in every group";
    return res;
  }
  for (std::size_t a = 0; a < nb; ++a) res.phase[a] = D.phases[(*best)[a]];
  res.ok = true;
  return res;
}

CombineResult combine_buckets(std::span<const double> y_block, const L2Block& blk, const std::vector<Index>& T,
                              const std::vector<double>& mags, const std::vector<double>& inner,
                              const std::vector<std::size_t>& occupied, double L_T, double log_C2k, double eps,
                              double eta, const PhaseSet& D, const Constants& c) {
  CombineResult res;
  const std::size_t nB = occupied.size();
  res.offset.assign(nB, 0.0);
  if (nB <= 1) {
    res.ok = true;
    return res;
  }
  const auto& lc = c.l2;
  const auto& L = *blk.comb;
  const bool paired = L.params().pattern.size() > blk.noise_rows + blk.phase_rows;
  std::vector<std::size_t> bof(T.size());
  for (std::size_t a = 0; a < T.size(); ++a) {
    const std::size_t h = blk.buckets > 1 ? blk.hash(T[a]) : 0;
    bof[a] = std::size_t(std::lower_bound(occupied.begin(), occupied.end(), h) - occupied.begin());
  }
  const double g = log_C2k - double(blk.l) + 2;
  const double thres = lc.thres_mult * lc.C_dd * eps * std::pow(eta, lc.eta_power) / (4 * lc.C1p * lc.C0 * g * g) * L_T;
  const std::size_t cap = ceil_pos(lc.kappa * double(T.size()));

  auto qa = group_members(T.size(), [&](std::size_t a) { return L.groups_of(T[a]); });
  std::map<std::pair<std::size_t, std::size_t>, bool> seen_pair;
  std::map<std::pair<std::size_t, std::size_t>, std::map<std::size_t, std::size_t>> votes;
  for (std::size_t s = 0; s < qa.size() && res.accepted < cap;) {
    std::size_t e = s;
    while (e < qa.size() && qa[e].first == qa[s].first) ++e;
    const std::uint64_t q = qa[s].first;
    const std::size_t hits = e - s, a = qa[s].second, b = hits > 1 ? qa[s + 1].second : a;
    s = e;
    if (hits != 2 || bof[a] == bof[b]) continue;
    if (!seen_pair.emplace(std::pair{a, b}, true).second) continue;
    ++res.good;
    std::vector<double> noise;
    for (std::size_t j = 0; j < blk.noise_rows; ++j)
      if (!L.xi(q, j, T[a]) && !L.xi(q, j, T[b])) {
        const double w = y_block[L.row_of(0, q, j)];
        noise.push_back(w * w);
      }
    if (noise.empty()) {
      ++res.rejected;
      continue;
    }
    std::nth_element(noise.begin(), noise.begin() + noise.size() / 2, noise.end());
    if (noise[noise.size() / 2] > thres) {
      ++res.rejected;
      continue;
    }
    ++res.accepted;
    std::vector<long> labels;
    const std::size_t step = paired ? 2 : 1;
    for (std::size_t t = 0; t < blk.phase_rows; ++t) {
      const std::size_t j = blk.noise_rows + t * step;
      if (!L.sub(q, j, T[a]) || !L.sub(q, j, T[b])) continue;
      std::vector<RotatedSum> rows{{0.0, y_block[L.row_of(0, q, j)]}};
      if (paired)
        rows.push_back({arg_ratio(L.weight(q, j + 1, T[b]), L.weight(q, j + 1, T[a])), y_block[L.row_of(0, q, j + 1)]});
      labels.push_back(rounded_relative(mags[a], mags[b], rows, 0.0, D, c.phase));
    }
    const long lab = plurality(labels);
    if (lab < 0) continue;
    ++res.edges;
    // bucket phase difference beta(bv) - beta(bu)
    double off = D.phases[std::size_t(lab)] - inner[b] + inner[a];
    std::size_t bu = bof[a], bv = bof[b];
    if (bu > bv) {
      std::swap(bu, bv);
      off = -off;
    }
    ++votes[{bu, bv}][nearest_index(wrap_phase(off), D)];
  }
  std::vector<PhaseEdge> edges;
  for (const auto& [pr, cnt] : votes) {
    std::size_t best = 0, bc = 0;
    for (auto [v, n] : cnt)
      if (n > bc) {
        best = v;
        bc = n;
      }
    edges.push_back({pr.first, pr.second, D.phases[best]});
  }
  auto prop = dfs_propagate(edges, nB);
  if (!prop.connected()) {
    res.reason = "bucket graph disconnected";
    return res;
  }
  res.offset = prop.phase;
  res.ok = true;
  return res;
}

PhaselessMeasurements l2_measure(const L2Ensemble& ens, const ComplexSignal& x) { return ens.stack().measure(x); }

L2Result l2_decode(const PhaselessMeasurements& y, const L2Ensemble& ens) {
  L2Result res;
  auto& d = res.diag;
  const auto& p = ens.params();
  const auto& c = ens.constants();
  const auto& D = ens.D();
  res.xhat.n = p.n;

  auto cand = ens.hh().identify(y);
  auto ycs = y.layer(ens.cs().hashed().name());
  std::vector<std::pair<double, Index>> ranked;
  for (Index i : cand) ranked.push_back({ens.cs().point_query(ycs, i), i});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (ranked.size() > ens.C2k()) ranked.resize(ens.C2k());
  std::vector<double> smags;
  for (auto [m, i] : ranked) {
    d.S.push_back(i);
    smags.push_back(m);
  }
  for (std::size_t t = 1; t <= ens.C2k(); ++t) d.L.push_back(compute_approx(y.layer(ens.approx_layer(t).name())));

  auto pr = prune(d.S, smags, d.L, p.eps, c.l2.C0, ens.log_C2k());
  d.T = pr.T;
  std::vector<double> mags;
  for (Index i : d.T) mags.push_back(smags[std::size_t(std::find(d.S.begin(), d.S.end(), i) - d.S.begin())]);
  const double p0 = p.P.phases[0];
  if (d.T.empty()) {
    d.ok = true;
    return res;
  }
  if (d.T.size() == 1) {
    d.ok = true;
    res.xhat = SparseApprox::from_pairs(p.n, {{d.T[0], std::polar(mags[0], p0)}});
    return res;
  }
  d.l = std::max<std::size_t>(1, ceil_log2(d.T.size()));
  d.reps = ens.reps_for(d.T.size());
  const double L_T = d.L.at(d.T.size() - 1);

  std::vector<std::vector<std::size_t>> pats;
  for (std::size_t r = 0; r < d.reps; ++r) {
    const auto& blk = ens.block(d.l, r);
    L2Repetition rep;
    std::map<std::size_t, std::vector<std::size_t>> by_bucket;  // bucket -> positions in T
    for (std::size_t a = 0; a < d.T.size(); ++a) by_bucket[blk.buckets > 1 ? blk.hash(d.T[a]) : 0].push_back(a);
    std::vector<std::size_t> occupied;
    std::vector<double> inner(d.T.size(), 0.0);
    auto yrel = y.layer(blk.rel->name());
    for (const auto& [bk, pos] : by_bucket) {
      occupied.push_back(bk);
      std::vector<Index> mem;
      std::vector<double> mm;
      for (auto a : pos) {
        mem.push_back(d.T[a]);
        mm.push_back(mags[a]);
      }
      auto bp = rel_phases_in_bucket(yrel, blk, bk, mem, mm, D, c);
      if (!bp.ok) {
        rep.reason = bp.reason;
        break;
      }
      for (std::size_t u = 0; u < pos.size(); ++u) inner[pos[u]] = bp.phase[u];
    }
    rep.buckets = by_bucket.size();
    if (rep.reason.empty()) {
      auto cb = combine_buckets(y.layer(blk.comb->name()), blk, d.T, mags, inner, occupied, L_T, ens.log_C2k(),
                                p.eps, std::min(p.P.eta, std::numbers::pi), D, c);
      rep.edges = cb.edges;
      rep.accepted = cb.accepted;
      if (!cb.ok) {
        rep.reason = cb.reason;
      } else {
        std::vector<double> ph(d.T.size());
        for (std::size_t a = 0; a < d.T.size(); ++a) {
          const std::size_t h = blk.buckets > 1 ? blk.hash(d.T[a]) : 0;
          const auto bi = std::size_t(std::lower_bound(occupied.begin(), occupied.end(), h) - occupied.begin());
          ph[a] = cb.offset[bi] + inner[a];
        }
        pats.push_back(canonical_pattern(ph, D));
        rep.ok = true;
      }
    }
    d.repetitions.push_back(rep);
  }
  const auto* best = vote(pats, &d.votes);
  std::vector<std::pair<Index, cplx>> out;
  for (std::size_t a = 0; a < d.T.size(); ++a)
    out.push_back({d.T[a], std::polar(mags[a], best ? p0 + D.phases[(*best)[a]] : p0)});
  res.xhat = SparseApprox::from_pairs(p.n, std::move(out));
  d.ok = best != nullptr;
  if (!d.ok) d.reason = "every repetition failed";
  return res;
}

std::string l2_diagnostics_json(const L2Diagnostics& d) {
  nlohmann::json j;
  j["ok"] = d.ok;
  j["reason"] = d.reason;
  j["S_size"] = d.S.size();
  j["T"] = d.T;
  j["T_size"] = d.T.size();
  j["l"] = d.l;
  j["reps"] = d.reps;
  j["votes"] = d.votes;
  auto& reps = j["repetitions"] = nlohmann::json::array();
  for (const auto& r : d.repetitions)
    reps.push_back({{"ok", r.ok}, {"reason", r.reason}, {"buckets", r.buckets}, {"edges", r.edges}, {"accepted", r.accepted}});
  return j.dump();
}

}  // namespace cpr
