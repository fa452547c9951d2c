// Acceptance suite: one PASS/FAIL line per criterion, details indented below it.
// Exits 0 once every criterion has run; --fail-exit makes any FAIL a nonzero exit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <thread>

#include "cpr/calibration.hpp"
#include "cpr/experiment.hpp"
#include "cpr/linf_l2.hpp"
#include "cpr/oracle.hpp"
#include "cpr/phase.hpp"

using namespace cpr;

namespace {

constexpr double kPi = std::numbers::pi;
using Clock = std::chrono::steady_clock;

int g_failed = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void verdict(const char* id, const char* what, bool pass, const std::string& detail) {
  std::printf("%s %s %s: %s\n", pass ? "PASS" : "FAIL", id, what, detail.c_str());
  std::fflush(stdout);
  g_failed += !pass;
}

void note(const std::string& s) {
  std::printf("    %s\n", s.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// ---- A1 ----

void a1(const Constants& C) {
  const auto t0 = Clock::now();
  const auto& pc = C.phase;
  const double beta_unit = 2 * pc.c;
  bool pass = true;
  std::vector<std::string> lines;
  std::size_t z_bad = 0;
  double z_worst = 0;
  for (double eps : {1.0 / 9, 0.05, 0.01}) {
    SeededStream s(101, "A1");
    s = s.child(static_cast<std::uint64_t>(std::llround(eps * 1e6)));
    const double beta = beta_unit * eps;
    const cplx rot[4] = {1.0, std::polar(1.0, beta), cplx(0, 1), std::polar(1.0, kPi / 2 + beta)};
    const bool in_pre = pc.c * eps <= kPi / 9;
    std::size_t within = 0, evaluated = 0;
    double worst = 0;
    for (std::size_t t = 0; t < 10000; ++t) {
      const double theta = 2 * kPi * s.uniform(t, 0);
      const double r = std::pow(10.0, 2 * s.uniform(t, 1) - 1);
      const cplx x = std::polar(1.0, 2 * kPi * s.uniform(t, 2));
      const cplx y = x * std::polar(r, theta);
      const double a = eps * std::min(1.0, r);
      cplx n[3];
      for (int j = 0; j < 3; ++j) n[j] = std::polar(a * s.uniform(t, 3 + j), 2 * kPi * s.uniform(t, 6 + j));
      for (int noisy = 0; noisy < 2; ++noisy) {
        const cplx n1 = noisy ? n[0] : 0.0, n2 = noisy ? n[1] : 0.0, n3 = noisy ? n[2] : 0.0;
        std::array<std::array<double, 2>, 2> sm{};
        for (int q = 0; q < 4; ++q) sm[q & 1][q >> 1] = std::abs(x + rot[q] * y + n1 + n3);
        const double err =
            circ_dist(estimate_full_phase(std::abs(x + n1), std::abs(y + n2), sm, eps, pc).theta, theta);
        if (!noisy) {
          z_worst = std::max(z_worst, err);
          z_bad += err > 1e-12;
        } else if (in_pre) {
          ++evaluated;
          within += err <= pc.c * eps;
          worst = std::max(worst, err);
        }
      }
    }
    if (in_pre) {
      pass &= within == evaluated;
      lines.push_back(fmt("eps=%.4g: %zu/%zu within c eps = %.4g, worst %.4g", eps, within, evaluated, pc.c * eps, worst));
    } else {
      lines.push_back(fmt("eps=%.4g: 0/10000 instances in precondition (c eps = %.3f > pi/9), not evaluated", eps,
                          pc.c * eps));
    }
  }
  const double dt = seconds_since(t0);
  pass &= z_bad == 0 && dt < 5.0;
  verdict("A1", "phase toolkit", pass, fmt("c=%.2f, zero-noise worst %.2g (%zu above 1e-12), %.2fs", pc.c, z_worst, z_bad, dt));
  for (auto& l : lines) note(l);
}

// ---- A2 ----

void a2() {
  auto cfg = config_from_json(R"({"scheme":"noiseless","k":32,"trials":500,"seed":2002,
    "signal":{"n":4096,"lo":1,"hi":10,"phases":{"equidistant":4096}}})");
  cfg.threads = workers();
  auto r = run_experiment(cfg);
  std::vector<double> dec;
  for (auto& t : r.records) dec.push_back(t.decode_seconds);
  const double med = median(dec);

  // one pass over x: the cheapest possible reader of the signal
  const auto x = trial_signal(cfg, 0);
  std::vector<double> scans;
  volatile double sink = 0;
  for (int rep = 0; rep < 51; ++rep) {
    const auto t0 = Clock::now();
    double acc = 0;
    for (std::size_t i = 0; i < x.n(); ++i) acc += std::norm(x[i]);
    sink = sink + acc;
    scans.push_back(seconds_since(t0));
  }
  const double scan = median(scans);
  const double C_total = double(r.m) / 32.0;
  const bool rate_ok = r.success_rate >= 0.99, time_ok = med < scan;
  verdict("A2", "noiseless exact recovery", rate_ok && time_ok,
          fmt("success %.4f (floor 0.99), rows %llu = %.1f k, median decode %.3g s vs one scan of x %.3g s", r.success_rate,
              static_cast<unsigned long long>(r.m), C_total, med, scan));
  note(fmt("recovery %s, timing clause %s", rate_ok ? "met" : "missed", time_ok ? "met" : "missed"));
}

// ---- A3 ----

void a3(const Constants& C) {
  auto cfg = config_from_json(R"({"scheme":"linf_l2","k":16,"trials":300,"seed":3003,"P":{"equidistant":4},
    "signal":{"n":4096,"tail":"gaussian","sigma":1,"lo":20,"hi":100}})");
  std::size_t ok = 0, sp = 0, trials = cfg.trials;
  std::uint64_t m = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto x = trial_signal(cfg, t);
    LinfEnsemble ens({cfg.signal.n, cfg.k, cfg.P, cfg.eps, ensemble_seed(cfg.seed, t)}, C);
    m = ens.rows();
    auto r = linf_decode(linf_measure(ens, x), ens);
    ok += evaluate(Scheme::linf_l2, cfg, x, r.xhat).success;
    const double tail = tail_norm(x, cfg.k, 2);
    bool all = true;
    for (Index i = 0; i < x.n(); ++i)
      if (std::norm(x[i]) >= tail * tail / double(cfg.k))
        all &= std::binary_search(r.diag.S_prime.begin(), r.diag.S_prime.end(), i);
    sp += all;
  }
  const double rate = double(ok) / double(trials), sp_rate = double(sp) / double(trials);
  verdict("A3", "linf/l2 recovery", rate >= 0.6 && sp_rate >= 0.63,
          fmt("linf bound %zu/%zu = %.3f (floor 0.6), S' containment %zu/%zu = %.3f (floor 0.63), m=%llu", ok, trials,
              rate, sp, trials, sp_rate, static_cast<unsigned long long>(m)));
}

// ---- A4 ----

void a4() {
  auto cfg = config_from_json(R"({"scheme":"l2_l2","k":16,"eps":0.5,"delta":0.1,"trials":300,"seed":4004,
    "P":{"equidistant":2},"signal":{"n":4096,"tail":"gaussian","sigma":1,"lo":20,"hi":100}})");
  cfg.threads = workers();
  auto r = run_experiment(cfg);
  std::size_t ok = 0;
  for (auto& t : r.records) ok += t.success;
  verdict("A4", "l2/l2 low failure", r.success_rate >= 0.9,
          fmt("%zu/%zu = %.3f (floor 0.9), m=%llu", ok, r.records.size(), r.success_rate,
              static_cast<unsigned long long>(r.m)));
}

// ---- A5 ----

void a5(const Constants& C) {
  const auto& lc = C.l2;
  auto d = compute_approx_draws(1024, 10000, 32, lc.ca_rows, lc.C_L, lc.ca_C2, C.calibration_seed + 5005);
  const double rate = sandwich_rate(d, lc.ca_C1);
  verdict("A5", "ComputeApprox sandwich", rate >= 0.99,
          fmt("%.4f of 10000 held-out draws (floor 0.99), C1=%.3g C2=%.3g, %llu rows/layer", rate, lc.ca_C1, lc.ca_C2,
              static_cast<unsigned long long>(lc.ca_rows)));
}

// ---- A6 ----

void a6(const Constants& C) {
  const std::size_t n = 4096, k = 16, trials = 1000;
  const double eps = 0.5;
  const std::uint64_t K = static_cast<std::uint64_t>(std::ceil(4 * double(k) / eps));
  std::size_t ok = 0, reps = 0;
  double worst = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    SignalSpec spec;
    spec.n = n;
    spec.k = k;
    spec.lo = 20;
    spec.hi = 100;
    spec.tail_model = TailModel::gaussian;
    spec.tail_sigma = 1.0;
    spec.phase_set = PhaseSet::equidistant_set(4);
    spec.seed = mix64(6006 + t);
    const auto x = generate(spec).x;
    CountSketch cs(n, K, cs_default_reps(n, C.sketch), C.sketch.cs_bucket_mult, mix64(7007 + t));
    reps = cs.reps();
    const auto y = cs.stack().measure(x);
    const auto layer = y.layer(cs.hashed().name());
    const double tail = tail_norm(x, k, 2), bound = tail * tail / double(K);
    double w = 0;
    for (Index i = 0; i < n; ++i) {
      const double e = std::abs(x[i]) - cs.point_query(layer, i);
      w = std::max(w, e * e / bound);
    }
    worst = std::max(worst, w);
    ok += w <= 1.0;
  }
  const double rate = double(ok) / double(trials);
  verdict("A6", "Count-Sketch magnitude bound", rate >= 0.99,
          fmt("all %zu coordinates within ||x_-k||^2/K in %zu/%zu trials = %.3f (floor 0.99), K=%llu, %zu reps, worst ratio %.3f",
              n, ok, trials, rate, static_cast<unsigned long long>(K), reps, worst));
}

// ---- A7 ----

void a7() {
  std::size_t ok = 0, total = 0;
  double worst = 0;
  std::uint64_t m = 0;
  for (double alpha : {1.1, 1.5}) {
    auto cfg = config_from_json(R"({"scheme":"l1_l1","k":16,"eps":0.5,"P":[0],"trials":150,"seed":7007,
      "signal":{"n":65536,"k":0,"tail":"power_law","scale":1,"tail_phase":"phase_set","lo":1,"hi":1}})");
    cfg.signal.tail_alpha = alpha;
    cfg.seed += static_cast<std::uint64_t>(alpha * 10);
    cfg.threads = workers();
    auto r = run_experiment(cfg);
    m = r.m;
    for (auto& t : r.records) {
      ok += t.success;
      ++total;
      worst = std::max(worst, t.err_l1 / (t.bound / 1.5));
    }
  }
  verdict("A7", "l1/l1 nonnegative", ok == total,
          fmt("%zu/%zu (alpha 1.1 and 1.5 alternating by block), worst error / tail_1 = %.3f (allowed 1.5), m=%llu", ok,
              total, worst, static_cast<unsigned long long>(m)));
  note("the uniform (for-all) property is not certifiable by sampling and is not tested");
}

// ---- A8 ----

void a8(const Constants& C) {
  const double rate = phase_prediction_success(256, 4, 1.0 / 3, C.graph.c_SP, 200, C.calibration_seed + 8008);
  verdict("A8", "phase prediction", rate >= 0.99,
          fmt("%.3f of 200 held-out runs (floor 0.99), n=256, error rate 1/3, c_SP=%.2g", rate, C.graph.c_SP));
}

// ---- A9 ----

void a9(const Constants& C) {
  const char* cfgs[] = {
      R"({"scheme":"noiseless","k":3,"signal":{"n":12,"lo":1,"hi":3,"phases":{"equidistant":4}}})",
      R"({"scheme":"linf_l2","k":3,"P":{"equidistant":4},"signal":{"n":12,"lo":1,"hi":3}})",
      // delta 0.01: the check targets decoder logic, the failure rate is measured by A4
      R"({"scheme":"l2_l2","k":3,"delta":0.01,"P":{"equidistant":2},"signal":{"n":12,"lo":1,"hi":3}})",
      R"({"scheme":"l1_l1","k":3,"P":[0],"signal":{"n":8,"lo":1,"hi":3,"tail_phase":"phase_set"}})"};
  const std::vector<double> mags{1, 2, 3};
  bool pass = true;
  std::vector<std::string> lines;
  for (const char* text : cfgs) {
    const auto cfg = config_from_json(text);
    // noiseless phases are arbitrary; the oracle grid is the 4-point set its signals use
    const PhaseSet grid = cfg.scheme == Scheme::noiseless ? PhaseSet::equidistant_set(4) : cfg.P;
    std::size_t agree = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
      SeededStream s(9009 + t, "A9");
      auto p = make_pipeline(cfg, C, s.bits(99));
      const auto A = oracle::materialize(p->stack());
      ComplexSignal x(cfg.signal.n);
      const auto supp = sample_without_replacement(s, cfg.signal.n, 1 + s.below(3, 0));
      for (std::size_t j = 0; j < supp.size(); ++j)
        x.values[supp[j]] = std::polar(mags[s.below(3, 1, j)], grid.phases[s.below(grid.size(), 2, j)]);
      const auto y = p->measure(x);
      const auto dec = p->decode(y).xhat;
      const auto ref = oracle::exhaustive_decode(y.values, A, 3, grid, mags);
      agree += phase_error(ref.to_dense(), dec, ErrorNorm::l2) <= 1e-9 * tail_norm(x, 0, 2);
    }
    pass &= agree == 50;
    lines.push_back(fmt("%s: %zu/50 agree with exhaustive search (n=%zu)", scheme_name(cfg.scheme), agree, cfg.signal.n));
  }

  const char* dense[] = {
      R"({"scheme":"noiseless","k":8,"signal":{"n":256,"lo":1,"hi":3,"phases":{"equidistant":256}}})",
      R"({"scheme":"linf_l2","k":4,"P":{"equidistant":4},"signal":{"n":256,"tail":"gaussian","sigma":1,"lo":20,"hi":30}})",
      R"({"scheme":"l2_l2","k":2,"P":{"equidistant":4},"signal":{"n":256,"tail":"gaussian","sigma":1,"lo":20,"hi":30}})",
      R"({"scheme":"l1_l1","k":8,"P":[0],"signal":{"n":256,"lo":1,"hi":3,"tail_phase":"phase_set"}})"};
  for (const char* text : dense) {
    const auto cfg = config_from_json(text);
    auto p = make_pipeline(cfg, C, 31);
    if (p->rows() * cfg.signal.n > oracle::kMaxDenseEntries) {
      pass = false;
      lines.push_back(fmt("%s: %llu rows too many to materialize", scheme_name(cfg.scheme),
                          static_cast<unsigned long long>(p->rows())));
      continue;
    }
    const auto A = oracle::materialize(p->stack());
    double worst = 0;
    for (std::size_t t = 0; t < 3; ++t) {
      const auto x = trial_signal(cfg, t);
      const auto yi = p->measure(x);
      const auto yd = A.measure(x);
      for (std::size_t r = 0; r < yd.size(); ++r) worst = std::max(worst, std::abs(yi.values[r] - yd[r]) / (1 + yd[r]));
    }
    pass &= worst <= 1e-12;
    lines.push_back(fmt("%s: implicit vs dense over %llu rows, worst relative gap %.2g", scheme_name(cfg.scheme),
                        static_cast<unsigned long long>(p->rows()), worst));
  }
  verdict("A9", "oracle equivalence", pass, "exhaustive decode agreement and dense materialization");
  for (auto& l : lines) note(l);
}

// ---- A10 ----

void a10() {
  const char* cfgs[] = {
      R"({"scheme":"noiseless","k":8,"trials":6,"seed":11,"signal":{"n":1024,"lo":1,"hi":10,"phases":{"equidistant":1024}}})",
      R"({"scheme":"linf_l2","k":8,"trials":4,"seed":12,"P":{"equidistant":4},"signal":{"n":1024,"tail":"gaussian","sigma":1,"lo":20,"hi":100}})",
      R"({"scheme":"l2_l2","k":8,"trials":3,"seed":13,"signal":{"n":1024,"tail":"gaussian","sigma":1,"lo":20,"hi":100}})",
      R"({"scheme":"l1_l1","k":8,"trials":4,"seed":14,"P":[0],"signal":{"n":4096,"k":0,"tail":"power_law","scale":1,"alpha":1.2,"tail_phase":"phase_set"}})"};
  bool pass = true;
  std::vector<std::string> lines;
  for (const char* text : cfgs) {
    auto cfg = config_from_json(text);
    auto a = run_experiment(cfg);
    cfg.threads = 3;
    auto b = run_experiment(cfg);
    auto p = make_pipeline(cfg, resolve_constants(cfg), ensemble_seed(cfg.seed, 1));
    const bool same_y = measurements_to_json(p->measure(trial_signal(cfg, 1))) ==
                        measurements_to_json(
                            make_pipeline(cfg, resolve_constants(cfg), ensemble_seed(cfg.seed, 1))->measure(trial_signal(cfg, 1)));
    const bool same = a.csv == b.csv && a.json == b.json && same_y;
    pass &= same;
    lines.push_back(fmt("%s: csv, aggregate and measurements %s", scheme_name(cfg.scheme), same ? "identical" : "DIFFER"));
  }
  const auto dir = std::filesystem::temp_directory_path() / "cpr_acceptance_sweep";
  auto s1 = sweep(cfgs[0], R"({"k":[4,8]})", (dir / "a").string());
  auto s2 = sweep(cfgs[0], R"({"k":[4,8]})", (dir / "b").string());
  bool same_sweep = s1.files.size() == s2.files.size();
  for (std::size_t i = 0; same_sweep && i < s1.files.size(); ++i)
    for (const char* ext : {".csv", ".json"}) {
      std::ifstream fa(s1.files[i] + ext), fb(s2.files[i] + ext);
      std::string ca((std::istreambuf_iterator<char>(fa)), {}), cb((std::istreambuf_iterator<char>(fb)), {});
      same_sweep &= ca == cb;
    }
  std::filesystem::remove_all(dir);
  pass &= same_sweep;
  lines.push_back(fmt("sweep outputs %s", same_sweep ? "identical" : "DIFFER"));
  verdict("A10", "determinism", pass, "re-runs with the same seed, 1 and 3 worker threads");
  for (auto& l : lines) note(l);
}

// logged trend of m / (k log2 n); not a criterion
void trend(const Constants& C) {
  std::printf("INFO rows / (k log2 n) for k in {8, 16, 32, 64}:\n");
  const char* cfgs[] = {
      R"({"scheme":"noiseless","signal":{"n":4096,"lo":1,"hi":10,"phases":{"equidistant":4096}}})",
      R"({"scheme":"linf_l2","P":{"equidistant":4},"signal":{"n":4096,"tail":"gaussian","sigma":1,"lo":20,"hi":100}})",
      R"({"scheme":"l2_l2","signal":{"n":4096,"tail":"gaussian","sigma":1,"lo":20,"hi":100}})",
      R"({"scheme":"l1_l1","P":[0],"signal":{"n":65536,"k":0,"tail":"power_law","scale":1,"tail_phase":"phase_set"}})"};
  for (const char* text : cfgs) {
    std::string line = std::string(scheme_name(config_from_json(text).scheme)) + ":";
    for (std::size_t k : {8, 16, 32, 64}) {
      auto cfg = config_from_json(text);
      cfg.k = k;
      if (cfg.scheme == Scheme::noiseless) cfg.signal.k = k;
      const double m = double(make_pipeline(cfg, C, 1)->rows());
      line += fmt(" %.1f", m / (double(k) * std::log2(double(cfg.signal.n))));
    }
    note(line);
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool fail_exit = false;
  for (int i = 1; i < argc; ++i) fail_exit |= std::strcmp(argv[i], "--fail-exit") == 0;
  const Constants C = Constants::defaults();
  std::printf("backend %s, constants %s\n", kernels::backend_name(kernels::active_backend()), C.hash().c_str());
  const auto t0 = Clock::now();
  a1(C);
  a2();
  a3(C);
  a4();
  a5(C);
  a6(C);
  a7();
  a8(C);
  a9(C);
  a10();
  trend(C);
  std::printf("%d of 10 criteria failed, %.1fs\n", g_failed, seconds_since(t0));
  return fail_exit && g_failed ? 1 : 0;
}
