#include "cpr/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cpr/exact_sparse.hpp"
#include "cpr/l1_l1.hpp"
#include "cpr/l2_l2.hpp"
#include "cpr/linf_l2.hpp"
#include "json.hpp"

namespace cpr {

using nlohmann::json;

const char* const kLibraryVersion = "cpr 1.0.0";
const char* const kCsvColumns = "trial,success,guarantee,err_linf,err_l2,err_l1,bound,m,decoder_ok,summary";

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::noiseless: return "noiseless";
    case Scheme::linf_l2: return "linf_l2";
    case Scheme::l2_l2: return "l2_l2";
    case Scheme::l1_l1: return "l1_l1";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& s) {
  for (Scheme v : {Scheme::noiseless, Scheme::linf_l2, Scheme::l2_l2, Scheme::l1_l1})
    if (s == scheme_name(v)) return v;
  throw ConfigError("scheme: unknown scheme '" + s + "'");
}

double default_gate(Scheme s) {
  switch (s) {
    case Scheme::noiseless: return 0.99;
    case Scheme::linf_l2: return 0.6;
    case Scheme::l2_l2: return 0.9;
    case Scheme::l1_l1: return 1.0;
  }
  return 1.0;
}

namespace {

// typed access to one JSON object, every error names the field path
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) { return j_.at(key); }
  std::string where(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }
  void get_size(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where(key) + ": expected a nonnegative integer");
    out = v.get<std::size_t>();
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

PhaseSet phases_from_json(const json& j, const std::string& path) {
  try {
    if (j.is_array()) {
      if (j.empty()) throw ConfigError(path + ": empty phase list");
      return PhaseSet::from_list(j.get<std::vector<double>>());
    }
    Fields f(j, path);
    std::size_t m = 0;
    double offset = 0.0;
    f.get_size("equidistant", m);
    f.get("offset", offset);
    f.finish();
    if (m == 0) throw ConfigError(path + ".equidistant: must be >= 1");
    return PhaseSet::equidistant_set(m, offset);
  } catch (const json::exception&) {
    throw ConfigError(path + ": expected a phase list or {\"equidistant\": m}");
  }
}

json phases_to_json(const PhaseSet& P) {
  if (P.equidistant) return {{"equidistant", P.size()}, {"offset", P.phases.front()}};
  return P.phases;
}

const char* tail_name(TailModel t) {
  switch (t) {
    case TailModel::zero: return "zero";
    case TailModel::gaussian: return "gaussian";
    case TailModel::power_law: return "power_law";
  }
  return "?";
}

std::string clean(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

double norm_of(const ComplexSignal& x, int p) { return tail_norm(x, 0, p); }

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Fields f(j, "");
  std::string scheme;
  f.get("scheme", scheme);
  if (scheme.empty()) throw ConfigError("scheme: required");
  cfg.scheme = scheme_from_name(scheme);
  f.get_size("k", cfg.k);
  if (cfg.scheme == Scheme::linf_l2) cfg.eps = 0.0;
  f.get("eps", cfg.eps);
  f.get("delta", cfg.delta);
  if (f.has("P")) cfg.P = phases_from_json(f.raw("P"), "P");
  f.get("tradeoff_a", cfg.tradeoff_a);
  f.get_size("trials", cfg.trials);
  f.get("seed", cfg.seed);
  f.get_size("threads", cfg.threads);
  f.get("constants", cfg.constants_path);
  f.get("strict", cfg.strict);
  f.get("out", cfg.out);
  f.get("gate", cfg.gate);

  auto& s = cfg.signal;
  s.k = cfg.k;
  s.phase_set = cfg.P;
  const bool has_signal = f.has("signal");
  f.finish();
  if (!has_signal) throw ConfigError("signal: required");
  Fields g(f.raw("signal"), "signal");
  g.get_size("n", s.n);
  g.get_size("k", s.k);
  std::string tail = "zero", tphase = "uniform";
  g.get("tail", tail);
  if (tail == "zero") s.tail_model = TailModel::zero;
  else if (tail == "gaussian") s.tail_model = TailModel::gaussian;
  else if (tail == "power_law") s.tail_model = TailModel::power_law;
  else throw ConfigError("signal.tail: expected zero, gaussian or power_law");
  g.get("sigma", s.tail_sigma);
  g.get("alpha", s.tail_alpha);
  g.get("scale", s.tail_scale);
  g.get("tail_phase", tphase);
  if (tphase == "uniform") s.tail_phase = TailPhase::uniform;
  else if (tphase == "phase_set") s.tail_phase = TailPhase::phase_set;
  else throw ConfigError("signal.tail_phase: expected uniform or phase_set");
  if (g.has("phases")) s.phase_set = phases_from_json(g.raw("phases"), "signal.phases");
  g.get("lo", s.lo);
  g.get("hi", s.hi);
  g.finish();
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

// out and threads are left out: they do not change results
std::string config_to_json(const ExperimentConfig& cfg) {
  const auto& s = cfg.signal;
  json sig = {{"n", s.n},
              {"k", s.k},
              {"tail", tail_name(s.tail_model)},
              {"sigma", s.tail_sigma},
              {"alpha", s.tail_alpha},
              {"scale", s.tail_scale},
              {"tail_phase", s.tail_phase == TailPhase::uniform ? "uniform" : "phase_set"},
              {"phases", phases_to_json(s.phase_set)},
              {"lo", s.lo},
              {"hi", s.hi}};
  json j = {{"scheme", scheme_name(cfg.scheme)},
            {"k", cfg.k},
            {"eps", cfg.eps},
            {"delta", cfg.delta},
            {"P", phases_to_json(cfg.P)},
            {"tradeoff_a", cfg.tradeoff_a},
            {"trials", cfg.trials},
            {"seed", cfg.seed},
            {"constants", cfg.constants_path},
            {"strict", cfg.strict},
            {"gate", cfg.gate},
            {"signal", sig}};
  return j.dump();
}

void validate(const ExperimentConfig& cfg) {
  const auto& s = cfg.signal;
  if (cfg.trials < 1) throw ConfigError("trials: must be >= 1");
  if (s.n < 2) throw ConfigError("signal.n: must be >= 2");
  if (cfg.k < 1 || cfg.k > s.n) throw ConfigError("k: need 1 <= k <= n");
  if (s.k > s.n) throw ConfigError("signal.k: exceeds n");
  if (s.k > 0 && !(s.lo > 0)) throw ConfigError("signal.lo: must be positive");
  if (s.hi < s.lo) throw ConfigError("signal.hi: below signal.lo");
  if (s.tail_sigma < 0) throw ConfigError("signal.sigma: must be >= 0");
  if (s.tail_scale < 0) throw ConfigError("signal.scale: must be >= 0");
  if (s.tail_model == TailModel::gaussian && s.k > 0 && s.hi <= s.tail_sigma)
    throw ConfigError("signal.hi: must exceed signal.sigma");
  if (s.tail_model == TailModel::power_law && s.k > 0 && s.hi <= s.tail_scale)
    throw ConfigError("signal.hi: must exceed signal.scale");
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
  if (cfg.strict && !cfg.constants_path.empty()) throw ConfigError("strict: conflicts with constants");
  if (cfg.gate > 1.0) throw ConfigError("gate: must be <= 1");
  auto in_P = [&](const PhaseSet& Q) {
    for (double p : Q.phases)
      if (cfg.P.distance_to(p) > 1e-12) return false;
    return true;
  };
  switch (cfg.scheme) {
    case Scheme::noiseless:
      if (s.tail_model != TailModel::zero) throw ConfigError("signal.tail: noiseless scheme needs a zero tail");
      if (s.k > cfg.k) throw ConfigError("signal.k: exceeds the decoder sparsity k");
      break;
    case Scheme::linf_l2:
      if (!in_P(s.phase_set)) throw ConfigError("signal.phases: head phases must lie in P");
      if (cfg.eps < 0) throw ConfigError("eps: must be >= 0");
      break;
    case Scheme::l2_l2:
      if (!in_P(s.phase_set)) throw ConfigError("signal.phases: head phases must lie in P");
      if (!(cfg.eps > 0 && cfg.eps <= 1)) throw ConfigError("eps: must be in (0, 1]");
      if (!(cfg.delta > 0 && cfg.delta < 1)) throw ConfigError("delta: must be in (0, 1)");
      break;
    case Scheme::l1_l1:
      if (!std::has_single_bit(s.n)) throw ConfigError("signal.n: l1_l1 needs a power of two");
      if (!(cfg.eps > 0 && cfg.eps <= 1)) throw ConfigError("eps: must be in (0, 1]");
      if (s.phase_set.size() != 1 || s.phase_set.phases[0] != 0.0)
        throw ConfigError("signal.phases: l1_l1 needs nonnegative signals, phases [0]");
      if (s.tail_model != TailModel::zero && s.tail_phase != TailPhase::phase_set)
        throw ConfigError("signal.tail_phase: l1_l1 needs phase_set");
      break;
  }
}

Constants resolve_constants(const ExperimentConfig& cfg) {
  if (cfg.strict) return Constants::strict();
  if (!cfg.constants_path.empty()) return Constants::load(cfg.constants_path);
  return Constants::defaults();
}

std::uint64_t signal_seed(std::uint64_t seed, std::size_t trial) {
  return SeededStream(seed, "trial").bits(trial, 0);
}

std::uint64_t ensemble_seed(std::uint64_t seed, std::size_t trial) {
  return SeededStream(seed, "trial").bits(trial, 1);
}

ComplexSignal trial_signal(const ExperimentConfig& cfg, std::size_t trial) {
  SignalSpec s = cfg.signal;
  s.seed = signal_seed(cfg.seed, trial);
  return generate(s).x;
}

namespace {

class NoiselessPipeline final : public Pipeline {
 public:
  NoiselessPipeline(const ExperimentConfig& cfg, const Constants& c, std::uint64_t seed)
      : ens_({cfg.signal.n, cfg.k, cfg.tradeoff_a, true, true, seed, "nl"}, c) {}
  std::uint64_t rows() const override { return ens_.rows(); }
  const LayerStack& stack() const override { return ens_.stack(); }
  PhaselessMeasurements measure(const ComplexSignal& x) const override { return ens_.measure(x); }
  DecodeOutput decode(const PhaselessMeasurements& y) const override {
    auto r = noiseless_decode(y, ens_);
    return {std::move(r.xhat), r.diag.ok,
            r.diag.ok ? "level=" + std::to_string(r.diag.level) + " edges=" + std::to_string(r.diag.edges)
                      : r.diag.reason};
  }

 private:
  NoiselessEnsemble ens_;
};

class LinfPipeline final : public Pipeline {
 public:
  LinfPipeline(const ExperimentConfig& cfg, const Constants& c, std::uint64_t seed)
      : ens_({cfg.signal.n, cfg.k, cfg.P, cfg.eps, seed}, c) {}
  std::uint64_t rows() const override { return ens_.rows(); }
  const LayerStack& stack() const override { return ens_.stack(); }
  PhaselessMeasurements measure(const ComplexSignal& x) const override { return linf_measure(ens_, x); }
  DecodeOutput decode(const PhaselessMeasurements& y) const override {
    auto r = linf_decode(y, ens_);
    std::string s = r.diag.branch;
    if (!r.diag.reason.empty()) s += " " + r.diag.reason;
    s += " S'=" + std::to_string(r.diag.S_prime.size());
    return {std::move(r.xhat), r.diag.ok, s};
  }

 private:
  LinfEnsemble ens_;
};

class L2Pipeline final : public Pipeline {
 public:
  L2Pipeline(const ExperimentConfig& cfg, const Constants& c, std::uint64_t seed)
      : ens_({cfg.signal.n, cfg.k, cfg.P, cfg.eps, cfg.delta, seed}, c) {}
  std::uint64_t rows() const override { return ens_.rows(); }
  const LayerStack& stack() const override { return ens_.stack(); }
  PhaselessMeasurements measure(const ComplexSignal& x) const override { return l2_measure(ens_, x); }
  DecodeOutput decode(const PhaselessMeasurements& y) const override {
    auto r = l2_decode(y, ens_);
    std::string s = r.diag.ok ? "ok" : r.diag.reason;
    s += " T=" + std::to_string(r.diag.T.size()) + " votes=" + std::to_string(r.diag.votes) + "/" +
         std::to_string(r.diag.reps);
    return {std::move(r.xhat), r.diag.ok, s};
  }

 private:
  L2Ensemble ens_;
};

class L1Pipeline final : public Pipeline {
 public:
  L1Pipeline(const ExperimentConfig& cfg, const Constants& c, std::uint64_t seed)
      : ens_({cfg.signal.n, cfg.k, cfg.eps, seed}, c) {}
  std::uint64_t rows() const override { return ens_.rows(); }
  const LayerStack& stack() const override { return ens_.stack(); }
  PhaselessMeasurements measure(const ComplexSignal& x) const override { return l1_measure(ens_, x); }
  DecodeOutput decode(const PhaselessMeasurements& y) const override {
    auto r = l1_decode(y, ens_);
    std::string s = "candidates=" + std::to_string(r.diag.candidates) + " best_round=" +
                    std::to_string(r.diag.best_round) + (r.diag.stopped_early ? " stopped" : "");
    return {std::move(r.xhat), true, s};
  }

 private:
  L1Ensemble ens_;
};

}  // namespace

std::unique_ptr<Pipeline> make_pipeline(const ExperimentConfig& cfg, const Constants& c, std::uint64_t seed) {
  switch (cfg.scheme) {
    case Scheme::noiseless: return std::make_unique<NoiselessPipeline>(cfg, c, seed);
    case Scheme::linf_l2: return std::make_unique<LinfPipeline>(cfg, c, seed);
    case Scheme::l2_l2: return std::make_unique<L2Pipeline>(cfg, c, seed);
    case Scheme::l1_l1: return std::make_unique<L1Pipeline>(cfg, c, seed);
  }
  throw ConfigError("scheme: unknown");
}

Guarantee evaluate(Scheme s, const ExperimentConfig& cfg, const ComplexSignal& x, const SparseApprox& xhat) {
  Guarantee g;
  const std::size_t k = cfg.k;
  const double slack = 1e-9 * norm_of(x, 2);
  switch (s) {
    case Scheme::noiseless:
      g.name = "exact";
      g.error = phase_error(x, xhat, ErrorNorm::l2);
      g.bound = slack;
      break;
    case Scheme::linf_l2:
      g.name = "linf";
      g.error = phase_error(x, xhat, ErrorNorm::linf);
      g.bound = tail_norm(x, k, 2) / std::sqrt(double(k)) + slack;
      break;
    case Scheme::l2_l2:
      g.name = "l2";
      g.error = phase_error(x, xhat, ErrorNorm::l2);
      g.bound = (1 + cfg.eps) * tail_norm(x, k, 2) + slack;
      break;
    case Scheme::l1_l1:
      g.name = "l1";
      g.error = phase_error(x, xhat, ErrorNorm::l1_real);
      g.bound = (1 + cfg.eps) * tail_norm(x, k, 1) + 1e-9 * norm_of(x, 1);
      break;
  }
  g.success = g.error <= g.bound;
  return g;
}

TrialRecord run_trial(const ExperimentConfig& cfg, const Constants& c, std::size_t trial) {
  TrialRecord rec;
  rec.trial = trial;
  const auto x = trial_signal(cfg, trial);
  const auto pipe = make_pipeline(cfg, c, ensemble_seed(cfg.seed, trial));
  const auto y = pipe->measure(x);
  rec.m = pipe->rows();
  const auto t0 = std::chrono::steady_clock::now();
  auto out = pipe->decode(y);
  rec.decode_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto g = evaluate(cfg.scheme, cfg, x, out.xhat);
  rec.success = g.success;
  rec.guarantee = g.name;
  rec.bound = g.bound;
  rec.err_linf = phase_error(x, out.xhat, ErrorNorm::linf);
  rec.err_l2 = phase_error(x, out.xhat, ErrorNorm::l2);
  rec.err_l1 = cfg.scheme == Scheme::l1_l1 ? phase_error(x, out.xhat, ErrorNorm::l1_real) : NAN;
  rec.decoder_ok = out.ok;
  rec.summary = clean(out.summary);
  return rec;
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json quantiles(const std::vector<double>& v) {
  return {{"median", quantile(v, 0.5)}, {"q90", quantile(v, 0.9)}, {"max", quantile(v, 1.0)}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::atomic<bool>* stop) {
  validate(cfg);
  const Constants c = resolve_constants(cfg);
  // construction errors surface here instead of inside a worker
  make_pipeline(cfg, c, ensemble_seed(cfg.seed, 0));

  const std::size_t N = cfg.trials;
  std::vector<TrialRecord> recs(N);
  std::vector<char> done(N, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      if (stop && stop->load()) return;
      const std::size_t t = next++;
      if (t >= N) return;
      try {
        recs[t] = run_trial(cfg, c, t);
        done[t] = 1;
      } catch (...) {
        std::lock_guard lk(mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  const std::size_t T = std::min(cfg.threads, N);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < T; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);

  ExperimentResult res;
  std::size_t completed = 0;
  while (completed < N && done[completed]) ++completed;
  res.interrupted = completed < N;
  recs.resize(completed);
  res.records = std::move(recs);
  res.constants_hash = c.hash();

  const std::string cfg_json = config_to_json(cfg);
  std::ostringstream csv;
  csv << "# version=" << kLibraryVersion << "\n# constants_hash=" << res.constants_hash << "\n# config=" << cfg_json
      << "\n"
      << kCsvColumns << "\n";
  std::size_t ok = 0;
  std::vector<double> el, e2, e1, times;
  for (const auto& r : res.records) {
    csv << r.trial << ',' << int(r.success) << ',' << r.guarantee << ',' << fmt(r.err_linf) << ',' << fmt(r.err_l2)
        << ',' << fmt(r.err_l1) << ',' << fmt(r.bound) << ',' << r.m << ',' << int(r.decoder_ok) << ',' << r.summary
        << '\n';
    ok += r.success;
    el.push_back(r.err_linf);
    e2.push_back(r.err_l2);
    if (std::isfinite(r.err_l1)) e1.push_back(r.err_l1);
    times.push_back(r.decode_seconds);
    res.m = r.m;
  }
  res.csv = csv.str();
  res.success_rate = completed ? double(ok) / double(completed) : 0.0;

  const double n = double(cfg.signal.n);
  json agg = {{"version", kLibraryVersion},
              {"constants_hash", res.constants_hash},
              {"config", json::parse(cfg_json)},
              {"trials", N},
              {"completed", completed},
              {"interrupted", res.interrupted},
              {"successes", ok},
              {"success_rate", res.success_rate},
              {"m", res.m},
              {"m_per_k_log_n", double(res.m) / (double(cfg.k) * std::log2(n))},
              {"err_linf", quantiles(el)},
              {"err_l2", quantiles(e2)},
              {"err_l1", e1.empty() ? json() : quantiles(e1)}};
  res.json = agg.dump(2) + "\n";
  json tj = {{"backend", kernels::backend_name(kernels::active_backend())},
             {"threads", T},
             {"median_decode_seconds", quantile(times, 0.5)},
             {"decode_seconds", times}};
  res.timing_json = tj.dump(2) + "\n";
  return res;
}

void write_result(const ExperimentResult& r, const std::string& prefix) {
  if (prefix.empty()) throw ConfigError("out: required");
  const std::filesystem::path p(prefix);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto put = [](const std::string& path, const std::string& text) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw ConfigError("out: cannot write " + path);
    o << text;
  };
  put(prefix + ".csv", r.csv);
  put(prefix + ".json", r.json);
  put(prefix + ".timing.json", r.timing_json);
}

namespace {

void set_path(json& j, const std::string& path, const json& v) {
  json* cur = &j;
  std::size_t s = 0;
  for (;;) {
    const auto d = path.find('.', s);
    const std::string key = path.substr(s, d == std::string::npos ? std::string::npos : d - s);
    if (key.empty()) throw ConfigError("grid: bad field path '" + path + "'");
    if (d == std::string::npos) {
      (*cur)[key] = v;
      return;
    }
    cur = &(*cur)[key];
    if (!cur->is_object() && !cur->is_null()) throw ConfigError("grid." + path + ": not an object path");
    s = d + 1;
  }
}

}  // namespace

SweepResult sweep(const std::string& config_json, const std::string& grid_json, const std::string& out_dir,
                  const std::atomic<bool>* stop) {
  json base, grid;
  try {
    base = json::parse(config_json);
    grid = json::parse(grid_json);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: invalid JSON: ") + e.what());
  }
  if (!grid.is_object() || grid.empty()) throw ConfigError("grid: empty grid");
  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array() || it.value().empty()) throw ConfigError("grid." + it.key() + ": empty axis");
    keys.push_back(it.key());
    values.push_back(it.value().get<std::vector<json>>());
  }
  std::size_t total = 1;
  for (const auto& v : values) total *= v.size();

  SweepResult out;
  json index = json::array();
  std::filesystem::create_directories(out_dir);
  for (std::size_t c = 0; c < total; ++c) {
    if (stop && stop->load()) break;
    json cfgj = base;
    json params;
    std::size_t rem = c;
    for (std::size_t a = keys.size(); a-- > 0;) {
      const auto& v = values[a][rem % values[a].size()];
      rem /= values[a].size();
      set_path(cfgj, keys[a], v);
      params[keys[a]] = v;
    }
    cfgj.erase("out");
    auto cfg = config_from_json(cfgj.dump());
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", c);
    const std::string prefix = (std::filesystem::path(out_dir) / name).string();
    auto r = run_experiment(cfg, stop);
    write_result(r, prefix);
    out.files.push_back(prefix);
    out.success_rate.push_back(r.success_rate);
    index.push_back({{"file", std::string(name)},
                     {"params", params},
                     {"success_rate", r.success_rate},
                     {"m", r.m},
                     {"interrupted", r.interrupted}});
    if (r.interrupted) break;
  }
  out.index_json = json({{"version", kLibraryVersion}, {"axes", keys}, {"runs", index}}).dump(2) + "\n";
  std::ofstream((std::filesystem::path(out_dir) / "index.json").string(), std::ios::binary) << out.index_json;
  return out;
}

std::string measurements_to_json(const PhaselessMeasurements& y) {
  json layers = json::array();
  for (const auto& l : y.layers) layers.push_back({{"name", l.name}, {"offset", l.offset}, {"size", l.size}});
  return json({{"layers", layers}, {"values", y.values}}).dump();
}

PhaselessMeasurements measurements_from_json(const std::string& text) {
  PhaselessMeasurements y;
  try {
    const auto j = json::parse(text);
    y.values = j.at("values").get<std::vector<double>>();
    for (const auto& l : j.at("layers"))
      y.layers.push_back({l.at("name").get<std::string>(), l.at("offset").get<std::size_t>(),
                          l.at("size").get<std::size_t>()});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("measurements: ") + e.what());
  }
  for (const auto& l : y.layers)
    if (l.offset + l.size > y.values.size()) throw ConfigError("measurements: layer '" + l.name + "' out of range");
  return y;
}

std::string approx_to_json(const SparseApprox& x) {
  std::vector<double> re, im;
  for (const auto& v : x.values) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return json({{"n", x.n}, {"support", x.support}, {"re", re}, {"im", im}}).dump();
}

}  // namespace cpr
