#include "cpr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "json.hpp"

#include "cpr/random.hpp"

namespace cpr {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ComplexSignal::ComplexSignal(std::vector<cplx> v) : values(std::move(v)) {
  for (auto z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::invalid_argument("ComplexSignal: non-finite entry");
}

SparseApprox SparseApprox::from_pairs(std::size_t n, std::vector<std::pair<Index, cplx>> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.first < b.first; });
  SparseApprox s;
  s.n = n;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    if (pairs[j].first >= n) throw std::out_of_range("SparseApprox: index out of range");
    if (j > 0 && pairs[j].first == pairs[j - 1].first) throw std::invalid_argument("SparseApprox: duplicate index");
    s.support.push_back(pairs[j].first);
    s.values.push_back(pairs[j].second);
  }
  return s;
}

SparseApprox SparseApprox::from_dense(const ComplexSignal& x) {
  SparseApprox s;
  s.n = x.n();
  for (std::size_t i = 0; i < x.n(); ++i)
    if (x[i] != cplx{}) {
      s.support.push_back(i);
      s.values.push_back(x[i]);
    }
  return s;
}

ComplexSignal SparseApprox::to_dense() const {
  ComplexSignal x(n);
  for (std::size_t j = 0; j < support.size(); ++j) x.values[support[j]] = values[j];
  return x;
}

double wrap_phase(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

double circ_dist(double a, double b) {
  double t = wrap_phase(a - b);
  return std::min(t, kTwoPi - t);
}

PhaseSet PhaseSet::from_list(std::vector<double> phases) {
  if (phases.empty()) throw std::invalid_argument("PhaseSet: empty");
  for (auto& p : phases) p = wrap_phase(p);
  std::sort(phases.begin(), phases.end());
  PhaseSet s;
  s.phases = phases;
  if (phases.size() == 1) {
    s.eta = std::numbers::pi;
    s.equidistant = true;
    return s;
  }
  std::vector<double> gaps;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    double next = i + 1 < phases.size() ? phases[i + 1] : phases[0] + kTwoPi;
    gaps.push_back(next - phases[i]);
  }
  double mn = *std::min_element(gaps.begin(), gaps.end());
  double mx = *std::max_element(gaps.begin(), gaps.end());
  if (mn <= 1e-12) throw std::invalid_argument("PhaseSet: repeated phase");
  s.eta = std::min(mn, std::numbers::pi);
  s.equidistant = (mx - mn) <= 1e-9;
  return s;
}

PhaseSet PhaseSet::equidistant_set(std::size_t m, double offset) {
  if (m == 0) throw std::invalid_argument("PhaseSet: empty");
  std::vector<double> p(m);
  for (std::size_t j = 0; j < m; ++j) p[j] = offset + kTwoPi * double(j) / double(m);
  PhaseSet s = from_list(p);
  s.equidistant = true;
  return s;
}

double PhaseSet::distance_to(double theta) const {
  double best = std::numbers::pi;
  for (double p : phases) best = std::min(best, circ_dist(theta, p));
  return best;
}

EtaDistinctResult is_eta_distinct(const std::vector<double>& raw, double eta) {
  if (raw.empty()) throw std::invalid_argument("is_eta_distinct: empty phase list");
  const std::size_t m = raw.size();
  auto dist_to_set = [&](double t) {
    double best = std::numbers::pi;
    for (double p : raw) best = std::min(best, circ_dist(t, p));
    return best;
  };
  constexpr double kZeroTol = 1e-12;  // absorbs rounding in stored phases
  EtaDistinctResult res;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (circ_dist(raw[i], raw[j]) < eta - kZeroTol) {
        res.ok = false;
        res.witness = {i, j, i};
        res.reason = "gap below eta";
        return res;
      }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      double worst = 0.0;
      std::size_t arg = 0;
      for (std::size_t l = 0; l < m; ++l) {
        double d = dist_to_set(raw[l] + raw[j] - raw[i]);
        if (d > worst) {
          worst = d;
          arg = l;
        }
      }
      if (worst > kZeroTol && worst < eta - kZeroTol) {
        res.ok = false;
        res.witness = {i, j, arg};
        res.reason = "rotation nearly maps the set onto itself";
        return res;
      }
    }
  return res;
}

std::vector<Index> head_indices(const ComplexSignal& x, std::size_t k) {
  if (k > x.n()) throw std::out_of_range("head_indices: k > n");
  std::vector<Index> idx(x.n());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::vector<double> mag(x.n());
  kernels::magnitudes(x.values.data(), mag.data(), x.n());
  auto cmp = [&](Index a, Index b) { return mag[a] != mag[b] ? mag[a] > mag[b] : a < b; };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), cmp);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double tail_norm(const ComplexSignal& x, std::size_t k, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("tail_norm: p must be 1 or 2");
  auto head = head_indices(x, k);
  std::vector<char> in(x.n(), 0);
  for (auto i : head) in[i] = 1;
  double s = 0.0;
  for (std::size_t i = 0; i < x.n(); ++i) {
    if (in[i]) continue;
    double a = std::abs(x[i]);
    s += p == 1 ? a : a * a;
  }
  return p == 1 ? s : std::sqrt(s);
}

namespace {

double linf_at(const ComplexSignal& x, const ComplexSignal& y, double theta) {
  return kernels::max_abs_diff_rotated(x.values.data(), y.values.data(), std::polar(1.0, theta), x.n());
}

}  // namespace

double phase_error(const ComplexSignal& x, const ComplexSignal& xhat, ErrorNorm norm) {
  if (x.n() != xhat.n()) throw std::invalid_argument("phase_error: dimension mismatch");
  const std::size_t n = x.n();
  if (norm == ErrorNorm::l1_real) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max({scale, std::abs(x[i]), std::abs(xhat[i])});
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(x[i].imag()) > 1e-12 * (1 + scale) || std::abs(xhat[i].imag()) > 1e-12 * (1 + scale))
        throw std::invalid_argument("phase_error: l1_real needs real-valued inputs");
    double plus = 0.0, minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      plus += std::abs(x[i].real() - xhat[i].real());
      minus += std::abs(x[i].real() + xhat[i].real());
    }
    return std::min(plus, minus);
  }
  cplx corr{};
  for (std::size_t i = 0; i < n; ++i) corr += std::conj(xhat[i]) * x[i];
  const double theta_star = corr == cplx{} ? 0.0 : std::arg(corr);
  if (norm == ErrorNorm::l2)
    return std::sqrt(kernels::sum_sq_diff_rotated(x.values.data(), xhat.values.data(), std::polar(1.0, theta_star), n));

  constexpr int kGrid = 65;
  const double lo = theta_star - std::numbers::pi / 2, hi = theta_star + std::numbers::pi / 2;
  const double h = (hi - lo) / (kGrid - 1);
  double best = linf_at(x, xhat, theta_star), best_t = theta_star;
  for (int g = 0; g < kGrid; ++g) {
    double t = lo + h * g;
    double v = linf_at(x, xhat, t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  double a = best_t - h, b = best_t + h;
  const double invphi = (std::sqrt(5.0) - 1) / 2;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = linf_at(x, xhat, c), fd = linf_at(x, xhat, d);
  while (b - a > 1e-9) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = linf_at(x, xhat, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = linf_at(x, xhat, d);
    }
  }
  return std::min({best, fc, fd});
}

double phase_error(const ComplexSignal& x, const SparseApprox& xhat, ErrorNorm norm) {
  if (xhat.n != x.n()) throw std::invalid_argument("phase_error: dimension mismatch");
  return phase_error(x, xhat.to_dense(), norm);
}

GeneratedSignal generate(const SignalSpec& spec) {
  if (spec.n == 0) throw ConfigError("signal: n must be positive");
  if (spec.k > spec.n) throw ConfigError("signal: k > n");
  if (spec.k > 0 && !(spec.lo > 0)) throw ConfigError("signal: lo must be positive");
  if (spec.hi < spec.lo) throw ConfigError("signal: hi < lo");
  if (spec.phase_set.phases.empty()) throw ConfigError("signal: empty phase set");
  if (spec.tail_model == TailModel::gaussian && spec.k > 0 && spec.hi <= spec.tail_sigma)
    throw ConfigError("signal: infeasible head/tail separation (hi <= tail sigma)");
  if (spec.tail_model == TailModel::power_law && spec.k > 0 && spec.hi <= spec.tail_scale)
    throw ConfigError("signal: infeasible head/tail separation (hi <= tail scale)");

  SeededStream root(spec.seed, "signal");
  GeneratedSignal out;
  out.x = ComplexSignal(spec.n);
  out.support = sample_without_replacement(root.child("support"), spec.n, spec.k);
  const auto& P = spec.phase_set.phases;
  SeededStream hs = root.child("head");
  for (std::size_t j = 0; j < out.support.size(); ++j) {
    double mag = spec.lo + (spec.hi - spec.lo) * hs.uniform(j, 0);
    double ph = P[hs.below(P.size(), j, 1)];
    out.x.values[out.support[j]] = std::polar(mag, ph);
  }
  if (spec.tail_model == TailModel::zero) return out;

  std::vector<char> head(spec.n, 0);
  for (auto i : out.support) head[i] = 1;
  // keeps every tail magnitude strictly below every head magnitude
  const double cap = spec.k > 0 ? spec.lo * (1.0 - 1e-9) : INFINITY;
  SeededStream ts = root.child("tail");
  auto tail_phase = [&](Index i, std::uint64_t attempt) {
    return spec.tail_phase == TailPhase::uniform ? 2.0 * std::numbers::pi * ts.uniform(i, attempt, 3)
                                                 : P[ts.below(P.size(), i, attempt + (1ULL << 40))];
  };
  if (spec.tail_model == TailModel::gaussian) {
    for (Index i = 0; i < spec.n; ++i) {
      if (head[i]) continue;
      cplx z{};
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (spec.tail_phase == TailPhase::uniform) {
          const double s = spec.tail_sigma / std::sqrt(2.0);
          z = {s * ts.gaussian(i, attempt, 1), s * ts.gaussian(i, attempt, 2)};
        } else {
          z = std::polar(spec.tail_sigma * std::abs(ts.gaussian(i, attempt, 1)), tail_phase(i, attempt));
        }
        if (std::abs(z) < cap) break;
        if (attempt == 63) {
          z *= 0.5 * cap / std::abs(z);
          break;
        }
      }
      out.x.values[i] = z;
    }
  } else {
    std::vector<Index> rest;
    for (Index i = 0; i < spec.n; ++i)
      if (!head[i]) rest.push_back(i);
    auto perm = random_permutation(ts.child("rank"), rest.size());
    for (std::size_t r = 0; r < rest.size(); ++r) {
      Index i = rest[perm[r]];
      double mag = std::min(spec.tail_scale * std::pow(double(r + 1), -spec.tail_alpha), cap);
      out.x.values[i] = std::polar(mag, tail_phase(i, 0));
    }
  }
  return out;
}

std::string signal_to_json(const ComplexSignal& x) {
  nlohmann::json j;
  j["n"] = x.n();
  auto& e = j["entries"] = nlohmann::json::array();
  for (auto z : x.values) e.push_back({z.real(), z.imag()});
  return j.dump();
}

ComplexSignal signal_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::size_t n = j.at("n").get<std::size_t>();
  const auto& e = j.at("entries");
  if (e.size() != n) throw std::invalid_argument("signal json: entry count mismatch");
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = {e[i].at(0).get<double>(), e[i].at(1).get<double>()};
  return ComplexSignal(std::move(v));
}

namespace {
constexpr char kMagic[8] = {'C', 'P', 'R', 'S', 'I', 'G', '0', '1'};

void put_le64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}
std::uint64_t get_le64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t(p[b]) << (8 * b);
  return v;
}
}  // namespace

std::vector<unsigned char> signal_to_binary(const ComplexSignal& x) {
  std::vector<unsigned char> out(kMagic, kMagic + 8);
  put_le64(out, x.n());
  for (auto z : x.values) {
    double re = z.real(), im = z.imag();
    std::uint64_t a, b;
    std::memcpy(&a, &re, 8);
    std::memcpy(&b, &im, 8);
    put_le64(out, a);
    put_le64(out, b);
  }
  return out;
}

ComplexSignal signal_from_binary(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw std::invalid_argument("signal binary: bad header");
  std::uint64_t n = get_le64(bytes.data() + 8);
  if (bytes.size() != 16 + 16 * n) throw std::invalid_argument("signal binary: truncated");
  std::vector<cplx> v(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t a = get_le64(bytes.data() + 16 + 16 * i), b = get_le64(bytes.data() + 24 + 16 * i);
    double re, im;
    std::memcpy(&re, &a, 8);
    std::memcpy(&im, &b, 8);
    v[i] = {re, im};
  }
  return ComplexSignal(std::move(v));
}

void save_signal(const ComplexSignal& x, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    f << signal_to_json(x);
  } else {
    auto b = signal_to_binary(x);
    f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
}

ComplexSignal load_signal(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (b.size() >= 8 && std::memcmp(b.data(), kMagic, 8) == 0) return signal_from_binary(b);
  return signal_from_json(std::string(b.begin(), b.end()));
}

}  // namespace cpr
