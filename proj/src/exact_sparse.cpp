#include "cpr/exact_sparse.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "cpr/phase.hpp"
#include "cpr/phase_graph.hpp"
#include "cpr/sketches.hpp"

namespace cpr {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kRelTol = 1e-9;
constexpr double kSnapTol = 1e-6;
}  // namespace

OmegaTable::OmegaTable(std::size_t n) : w_(n) {
  if (n == 0) throw std::invalid_argument("OmegaTable: n = 0");
  for (std::size_t j = 0; j < n; ++j) w_[j] = std::polar(1.0, kTwoPi * double(j) / double(n));
}

BucketRows bucket_forward(const OmegaTable& w, std::size_t M, const std::vector<cplx>& gamma,
                          const std::vector<Index>& support, const std::vector<cplx>& values) {
  BucketRows r;
  r.singles.resize(M);
  r.prefix.resize(M);
  r.companions.resize(M ? M - 1 : 0);
  cplx s{};
  for (std::size_t m = 0; m < M; ++m) {
    cplx f{};
    for (std::size_t j = 0; j < support.size(); ++j) f += w.pow(std::uint64_t(m) * support[j]) * values[j];
    if (!gamma.empty()) f *= gamma[m];
    if (m > 0) r.companions[m - 1] = std::abs(s + cplx(0, 1) * f);
    s += f;
    r.singles[m] = std::abs(f);
    r.prefix[m] = std::abs(s);
  }
  return r;
}

namespace {

BucketSolution fail(std::string why) {
  BucketSolution s;
  s.reason = std::move(why);
  return s;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

BucketSolution solve_bucket(const BucketProblem& p, const OmegaTable& w) {
  const std::size_t M = p.M;
  if (p.singles.size() != M || p.prefix.size() != M || p.companions.size() + 1 != M)
    throw std::invalid_argument("solve_bucket: row count mismatch");
  const double scale = std::max({max_of(p.singles), max_of(p.prefix), max_of(p.companions)});
  if (scale == 0.0) {
    BucketSolution s;
    s.ok = true;
    return s;
  }
  const double tol = kRelTol * scale;
  const PhaseConstants pc;

  // phases of f relative to the first nonzero f
  std::vector<cplx> f(M);
  bool have_ref = false;
  cplx s{};
  for (std::size_t m = 0; m < M; ++m) {
    const double a = p.singles[m];
    if (a <= tol) continue;
    if (!have_ref) {
      f[m] = a;
      s = f[m];
      have_ref = true;
      continue;
    }
    const double A = p.prefix[m - 1];
    if (A <= tol) return fail("prefix cancellation");
    auto e = fit_relative_phase(A, a, {{0.0, p.prefix[m]}, {std::numbers::pi / 2, p.companions[m - 1]}}, 0.0, pc);
    f[m] = std::polar(a, std::arg(s) + e.theta);
    s += f[m];
  }
  std::vector<cplx> F(M);
  for (std::size_t m = 0; m < M; ++m) F[m] = p.gamma.empty() ? f[m] : f[m] / p.gamma[m];

  BucketSolution out;
  const std::size_t n = p.n;
  if (M >= n) {
    double zmax = 0.0;
    std::vector<cplx> z(n);
    for (std::size_t q = 0; q < n; ++q) {
      cplx acc{};
      for (std::size_t m = 0; m < n; ++m) acc += F[m] * std::conj(w.pow(std::uint64_t(m) * q));
      z[q] = acc / double(n);
      zmax = std::max(zmax, std::abs(z[q]));
    }
    for (std::size_t q = 0; q < n; ++q)
      if (std::abs(z[q]) > kRelTol * zmax) {
        out.support.push_back(q);
        out.values.push_back(z[q]);
      }
  } else {
    using Mat = Eigen::MatrixXcd;
    using Vec = Eigen::VectorXcd;
    const std::size_t Kh = M / 2;
    Mat H(Kh, Kh);
    for (std::size_t a = 0; a < Kh; ++a)
      for (std::size_t b = 0; b < Kh; ++b) H(a, b) = F[a + b];
    Eigen::JacobiSVD<Mat> svd(H);
    const auto& sv = svd.singularValues();
    std::size_t L = 0;
    for (Eigen::Index j = 0; j < sv.size(); ++j)
      if (sv(j) > 1e-10 * sv(0)) ++L;
    if (L == 0) return fail("zero syndrome with nonzero measurements");
    Mat A(M - L, L);
    Vec rhs(M - L);
    for (std::size_t a = 0; a + L < M; ++a) {
      for (std::size_t b = 0; b < L; ++b) A(a, b) = F[a + b];
      rhs(a) = -F[a + L];
    }
    Vec q = A.completeOrthogonalDecomposition().solve(rhs);
    Mat C = Mat::Zero(L, L);
    for (std::size_t j = 1; j < L; ++j) C(j, j - 1) = 1.0;
    for (std::size_t j = 0; j < L; ++j) C(j, L - 1) = -q(j);
    Eigen::ComplexEigenSolver<Mat> es(C, false);
    if (es.info() != Eigen::Success) return fail("eigen solve failed");
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
      const cplx r = es.eigenvalues()(j);
      const double t = std::arg(r) / kTwoPi * double(n);
      const auto pos = static_cast<Index>(((static_cast<long long>(std::llround(t)) % (long long)n) + (long long)n) %
                                          (long long)n);
      if (std::abs(r - w.pow(pos)) > kSnapTol) return fail("root off the unit-circle grid");
      out.support.push_back(pos);
    }
    std::sort(out.support.begin(), out.support.end());
    if (std::adjacent_find(out.support.begin(), out.support.end()) != out.support.end())
      return fail("repeated root");
    Mat V(M, L);
    Vec Fv(M);
    for (std::size_t m = 0; m < M; ++m) {
      Fv(m) = F[m];
      for (std::size_t j = 0; j < L; ++j) V(m, j) = w.pow(std::uint64_t(m) * out.support[j]);
    }
    Vec c = V.colPivHouseholderQr().solve(Fv);
    for (std::size_t j = 0; j < L; ++j) out.values.push_back(c(j));
  }
  if (out.support.size() > p.K) return fail("bucket overflow");
  if (p.member)
    for (auto i : out.support)
      if (!p.member(i)) return fail("recovered position outside bucket");
  BucketRows r = bucket_forward(w, M, p.gamma, out.support, out.values);
  const double err =
      std::max({max_diff(r.singles, p.singles), max_diff(r.prefix, p.prefix), max_diff(r.companions, p.companions)});
  if (err > tol) return fail("re-measured magnitudes disagree");
  out.ok = true;
  return out;
}

NoiselessBucketLayer::NoiselessBucketLayer(std::string name, std::size_t n, std::size_t B, std::size_t M, HashFamily h,
                                           std::shared_ptr<const OmegaTable> w, std::uint64_t seed)
    : name_(std::move(name)), n_(n), B_(B), M_(M), h_(std::move(h)), w_(std::move(w)),
      gamma_(SeededStream(seed, "gamma:" + name_)) {}

cplx NoiselessBucketLayer::gamma(std::size_t b, std::size_t m) const {
  return std::polar(1.0, kTwoPi * gamma_.uniform(b, m));
}

void NoiselessBucketLayer::column(std::uint64_t i, std::vector<ColumnEntry>& out) const {
  const std::uint64_t b = h_(i);
  const std::uint64_t base = b * per_bucket();
  cplx acc{};
  for (std::size_t m = 0; m < M_; ++m) {
    const cplx g = gamma(b, m) * w_->pow(std::uint64_t(m) * i);
    out.push_back({base + m, g});
    if (m > 0) out.push_back({base + 2 * M_ + m - 1, acc + cplx(0, 1) * g});
    acc += g;
    out.push_back({base + M_ + m, acc});
  }
}

cplx NoiselessBucketLayer::entry(std::uint64_t row, std::uint64_t col) const {
  if (row >= rows() || col >= n_) throw std::out_of_range("NoiselessBucketLayer::entry");
  const std::uint64_t b = row / per_bucket(), j = row % per_bucket();
  if (h_.raw(col) % B_ != b) return {};
  auto g = [&](std::size_t m) {
    return std::polar(1.0, kTwoPi * (gamma_.uniform(b, m) + double((std::uint64_t(m) * col) % n_) / double(n_)));
  };
  if (j < M_) return g(j);
  if (j < 2 * M_) {
    cplx acc{};
    for (std::size_t m = 0; m <= j - M_; ++m) acc += g(m);
    return acc;
  }
  const std::size_t m = j - 2 * M_ + 1;
  cplx acc{};
  for (std::size_t t = 0; t < m; ++t) acc += g(t);
  return acc + cplx(0, 1) * g(m);
}

NoiselessEnsemble::NoiselessEnsemble(NoiselessParams p, const Constants& c) : p_(std::move(p)), c_(c) {
  if (p_.n == 0 || p_.k == 0 || p_.k > p_.n) throw ConfigError("noiseless: need 1 <= k <= n");
  const auto& nc = c_.noiseless;
  const double k = double(p_.k);
  const double lk = log2_or_one(k);
  const auto K_log = static_cast<std::size_t>(std::ceil(nc.k_mult * std::log2(k)));
  if (p_.tradeoff_a < 0) {
    B_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(k / (nc.c_bucket * lk))));
    K_ = std::max<std::size_t>(1, K_log);
  } else {
    if (p_.tradeoff_a > 1) throw ConfigError("noiseless: tradeoff a must lie in [0, 1]");
    B_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::pow(k, 1.0 - p_.tradeoff_a))));
    K_ = std::max<std::size_t>({1, K_log, static_cast<std::size_t>(std::ceil(3 * std::pow(k, p_.tradeoff_a)))});
  }
  M_ = std::min<std::size_t>(2 * K_, p_.n);
  SeededStream s(p_.seed, p_.prefix + ":noiseless");
  h_ = HashFamily(s.child("h"), 0, kwise_degree(nc.hash_alpha, p_.k), B_);
  omega_ = std::make_shared<OmegaTable>(p_.n);
  bucket_layer_ = std::make_shared<NoiselessBucketLayer>(p_.prefix + ":buckets", p_.n, B_, M_, h_, omega_, p_.seed);
  stack_.add(bucket_layer_);
  if (B_ > 1) {
    const std::size_t Lmax = std::max<std::uint64_t>(1, ceil_log2(p_.k));
    const double half = std::ceil(0.5 * std::log2(k)) + 1;
    for (std::size_t l = 1; l <= Lmax; ++l) {
      double groups = nc.alpha * nc.c_R * std::ldexp(1.0, int(l));
      if (double(l) <= half) groups *= lk;
      MaskedLayerParams mp;
      mp.name = p_.prefix + ":F" + std::to_string(l);
      mp.n = p_.n;
      mp.groups = static_cast<std::uint64_t>(std::ceil(groups));
      mp.rate = std::ldexp(1.0, -int(l));
      mp.pattern = p_.companions ? std::vector<RowKind>{RowKind::one, RowKind::one_tau}
                                 : std::vector<RowKind>{RowKind::one};
      mp.seed = p_.seed;
      stitch_.push_back(std::make_shared<MaskedLayer>(mp));
      stack_.add(stitch_.back());
    }
  }
}

std::vector<cplx> NoiselessEnsemble::gamma(std::size_t bucket) const {
  std::vector<cplx> g(M_);
  for (std::size_t m = 0; m < M_; ++m) g[m] = bucket_layer_->gamma(bucket, m);
  return g;
}

std::vector<TwoHitRow> count_two_hit_rows(const MaskedLayer& layer, const std::vector<Index>& supp) {
  const std::uint64_t G = layer.params().groups;
  std::vector<std::uint32_t> C(G, 0);
  std::vector<Index> first(G, 0), second(G, 0);
  std::vector<std::uint64_t> touched;
  for (Index i : supp)
    for (auto q : layer.groups_of(i)) {
      if (C[q] == 0) {
        first[q] = i;
        touched.push_back(q);
      } else if (C[q] == 1) {
        second[q] = i;
      }
      ++C[q];
    }
  std::sort(touched.begin(), touched.end());
  std::vector<TwoHitRow> J;
  for (auto q : touched)
    if (C[q] == 2) J.push_back({q, std::min(first[q], second[q]), std::max(first[q], second[q])});
  return J;
}

void canonicalize(SparseApprox& x) {
  if (x.values.empty()) return;
  double mx = 0.0;
  for (const auto& v : x.values) mx = std::max(mx, std::abs(v));
  if (mx == 0.0) return;
  std::size_t pick = 0;
  for (std::size_t j = 0; j < x.values.size(); ++j)
    if (std::abs(x.values[j]) >= mx * (1 - 1e-9)) {
      pick = j;
      break;
    }
  const cplx rot = std::conj(x.values[pick]) / std::abs(x.values[pick]);
  for (auto& v : x.values) v *= rot;
  x.values[pick] = std::abs(x.values[pick]);
}

NoiselessResult noiseless_decode(const PhaselessMeasurements& y, const NoiselessEnsemble& ens) {
  NoiselessResult res;
  auto& d = res.diag;
  const auto& P = ens.params();
  res.xhat.n = P.n;
  auto yb = y.layer(P.prefix + ":buckets");
  const auto& bl = ens.bucket_layer();
  const std::size_t R = bl.per_bucket(), M = ens.M();
  if (yb.size() != ens.buckets() * R) throw std::invalid_argument("noiseless_decode: bucket layer size mismatch");

  std::vector<std::vector<Index>> bsupp(ens.buckets());
  std::vector<std::vector<cplx>> bval(ens.buckets());
  for (std::size_t b = 0; b < ens.buckets(); ++b) {
    BucketProblem bp;
    bp.n = P.n;
    bp.M = M;
    bp.K = ens.K();
    const double* base = yb.data() + b * R;
    bp.singles.assign(base, base + M);
    bp.prefix.assign(base + M, base + 2 * M);
    bp.companions.assign(base + 2 * M, base + 3 * M - 1);
    bp.gamma = ens.gamma(b);
    bp.member = [&ens, b](Index i) { return ens.bucket_of(i) == b; };
    auto sol = solve_bucket(bp, ens.omega());
    if (!sol.ok) {
      ++d.failed_buckets;
      if (d.reason.empty()) d.reason = "bucket " + std::to_string(b) + ": " + sol.reason;
      continue;
    }
    bsupp[b] = std::move(sol.support);
    bval[b] = std::move(sol.values);
  }
  if (d.failed_buckets) return res;

  std::vector<std::size_t> occ;  // occupied buckets in order
  std::vector<std::size_t> vid(ens.buckets(), SIZE_MAX);
  std::vector<Index> supp;
  for (std::size_t b = 0; b < ens.buckets(); ++b) {
    if (bsupp[b].empty()) continue;
    vid[b] = occ.size();
    occ.push_back(b);
    supp.insert(supp.end(), bsupp[b].begin(), bsupp[b].end());
  }
  std::sort(supp.begin(), supp.end());
  d.support_size = supp.size();
  d.occupied_buckets = occ.size();

  std::vector<double> offset(occ.size(), 0.0);
  if (occ.size() > 1) {
    std::size_t l = std::max<std::uint64_t>(1, ceil_log2(supp.size()));
    l = std::min(l, ens.max_level());
    d.level = l;
    auto value_of = [&](Index i) {
      const auto& s = bsupp[ens.bucket_of(i)];
      auto it = std::lower_bound(s.begin(), s.end(), i);
      return bval[ens.bucket_of(i)][it - s.begin()];
    };
    std::vector<PhaseEdge> edges;
    // level l first, then the remaining levels; all of them are part of the fixed ensemble
    std::vector<std::size_t> order{l};
    for (std::size_t o = 1; o <= ens.max_level(); ++o)
      if (o != l && ens.params().pool_levels) order.push_back(o);
    for (std::size_t lev : order) {
      const MaskedLayer& F = ens.stitch_layer(lev);
      auto yl = y.layer(F.name());
      auto J = count_two_hit_rows(F, supp);
      d.two_hit_rows += J.size();
      const bool comp = F.params().pattern.size() > 1;
      for (const auto& t : J) {
        const std::size_t bu = ens.bucket_of(t.u), bv = ens.bucket_of(t.v);
        if (bu == bv) continue;
        const cplx A = value_of(t.u), Bv = value_of(t.v);
        std::vector<RotatedSum> rows{{0.0, yl[F.row_of(0, t.q, 0)]}};
        if (comp) {
          const bool iu = F.tau_is_i(t.q, t.u), iv = F.tau_is_i(t.q, t.v);
          const double psi = iu == iv ? 0.0 : (iv ? std::numbers::pi / 2 : -std::numbers::pi / 2);
          rows.push_back({psi, yl[F.row_of(0, t.q, 1)]});
        }
        auto e = fit_relative_phase(std::abs(A), std::abs(Bv), rows, 0.0, ens.constants().phase);
        double theta = e.theta;
        if (e.mode == PhaseMode::unsigned_angle) {
          if (comp) continue;
          theta = theta < std::numbers::pi / 2 ? 0.0 : std::numbers::pi;
        }
        edges.push_back({vid[bu], vid[bv], wrap_phase(theta - std::arg(Bv) + std::arg(A))});
      }
    }
    d.edges = edges.size();
    const double bo = double(occ.size());
    const auto G = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(ens.constants().noiseless.group_c * bo * log2_or_one(bo))));
    const std::size_t ngroups = std::max<std::size_t>(1, edges.size() / G);
    d.groups = ngroups;
    std::vector<std::vector<double>> patterns;
    std::vector<std::size_t> votes;
    for (std::size_t g = 0; g < ngroups; ++g) {
      const std::size_t lo = g * G, hi = g + 1 == ngroups ? edges.size() : std::min(edges.size(), lo + G);
      std::vector<PhaseEdge> part(edges.begin() + lo, edges.begin() + hi);
      auto pr = dfs_propagate(part, occ.size());
      if (!pr.connected()) continue;
      ++d.connected_groups;
      bool found = false;
      for (std::size_t j = 0; j < patterns.size() && !found; ++j) {
        double md = 0.0;
        for (std::size_t v = 0; v < occ.size(); ++v) md = std::max(md, circ_dist(patterns[j][v], pr.phase[v]));
        if (md < 1e-6) {
          ++votes[j];
          found = true;
        }
      }
      if (!found) {
        patterns.push_back(pr.phase);
        votes.push_back(1);
      }
    }
    if (patterns.empty() && ngroups > 1) {
      auto pr = dfs_propagate(edges, occ.size());
      if (pr.connected()) {
        patterns.push_back(pr.phase);
        votes.push_back(1);
      }
    }
    if (patterns.empty()) {
      d.reason = "stitch failure: bucket graph disconnected";
      return res;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < patterns.size(); ++j)
      if (votes[j] > votes[best]) best = j;
    d.winner_votes = votes[best];
    offset = patterns[best];
  }

  std::vector<std::pair<Index, cplx>> pairs;
  for (std::size_t v = 0; v < occ.size(); ++v) {
    const cplx rot = std::polar(1.0, offset[v]);
    const std::size_t b = occ[v];
    for (std::size_t j = 0; j < bsupp[b].size(); ++j) pairs.push_back({bsupp[b][j], rot * bval[b][j]});
  }
  res.xhat = SparseApprox::from_pairs(P.n, std::move(pairs));
  canonicalize(res.xhat);
  d.ok = true;
  return res;
}

}  // namespace cpr
