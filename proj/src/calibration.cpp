#include "cpr/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include "cpr/l2_l2.hpp"
#include "cpr/phase_graph.hpp"
#include "cpr/sketches.hpp"
#include "json.hpp"

namespace cpr {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t T = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < T; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) f(i);
    });
  for (auto& th : pool) th.join();
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(q * double(v.size()))) - 1);
  return v[idx];
}

}  // namespace

PhaseCalibration calibrate_phase(const PhaseGrid& grid, const PhaseConstants& base, double margin) {
  PhaseCalibration out;
  std::vector<cplx> dir(grid.directions);
  for (std::size_t d = 0; d < grid.directions; ++d) dir[d] = std::polar(1.0, 2 * kPi * double(d) / double(grid.directions));
  std::mutex mu;
  for (double eps : grid.eps) {
    const double beta = 2 * base.c * eps;
    double worst_eps = 0.0;
    for (double r : grid.ratios) {
      const double a = eps * std::min(1.0, r);
      parallel_for(grid.thetas, [&](std::size_t ti) {
        const double theta = 2 * kPi * double(ti) / double(grid.thetas);
        const cplx x = 1.0, y = std::polar(r, theta);
        const cplx rot[4] = {1.0, std::polar(1.0, beta), cplx(0, 1), std::polar(1.0, kPi / 2 + beta)};
        double wf = 0.0, wu = 0.0;
        for (const cplx& d1 : dir)
          for (const cplx& d2 : dir)
            for (const cplx& d3 : dir) {
              const cplx n1 = a * d1, n2 = a * d2, n3 = a * d3;
              const double ax = std::abs(x + n1), ay = std::abs(y + n2);
              std::array<std::array<double, 2>, 2> s{};
              for (int t = 0; t < 4; ++t) s[t & 1][t >> 1] = std::abs(x + rot[t] * y + n1 + n3);
              wf = std::max(wf, circ_dist(estimate_full_phase(ax, ay, s, eps, base).theta, theta));
              const double su = std::abs(x + y + n1 + n2 + n3);
              const double tu = estimate_unsigned_phase(ax, ay, su, eps, base).theta;
              wu = std::max(wu, std::abs(tu - circ_dist(theta, 0.0)));
            }
        std::lock_guard lk(mu);
        worst_eps = std::max(worst_eps, wf);
        out.full_ratio = std::max(out.full_ratio, wf / eps);
        out.unsigned_ratio = std::max(out.unsigned_ratio, wu / std::sqrt(eps));
        out.evaluated += grid.directions * grid.directions * grid.directions;
      });
    }
    out.full_by_eps.push_back(worst_eps);
  }
  out.c = margin * out.full_ratio;
  out.c0 = margin * out.unsigned_ratio;
  return out;
}

double phase_prediction_success(std::size_t n, std::size_t m, double error_rate, double c_SP, std::size_t trials,
                                std::uint64_t seed) {
  const PhaseSet P = PhaseSet::equidistant_set(m);
  const auto N = static_cast<std::size_t>(std::ceil(c_SP * double(n) * log2_or_one(double(n))));
  const auto W = static_cast<std::size_t>(std::llround(error_rate * double(N)));
  std::atomic<std::size_t> ok{0};
  parallel_for(trials, [&](std::size_t t) {
    SeededStream s(seed, "phase-prediction");
    s = s.child(t);
    std::vector<std::size_t> truth(n);
    for (std::size_t v = 0; v < n; ++v) truth[v] = s.below(m, v, 1);
    std::vector<PhaseSample> samples(N);
    for (std::size_t j = 0; j < N; ++j) {
      auto [u, v] = random_pair(s.child("pairs"), n, j);
      samples[j] = {u, v, wrap_phase(P.phases[truth[v]] - P.phases[truth[u]])};
    }
    if (m > 1)
      for (auto j : sample_without_replacement(s.child("wrong"), N, W))
        samples[j].d = wrap_phase(samples[j].d + P.phases[1 + s.below(m - 1, j, 2)]);
    PhasePredictionOptions opt;
    opt.grid = P;
    auto a = solve_phase_prediction(n, samples, opt);
    if (!a.ok) return;
    for (std::size_t v = 0; v < n; ++v)
      if (circ_dist(a.phase[v] - a.phase[0], P.phases[truth[v]] - P.phases[truth[0]]) > 1e-6) return;
    ++ok;
  });
  return double(ok) / double(std::max<std::size_t>(1, trials));
}

GridCalibration calibrate_c_SP(std::size_t n, std::size_t m, double error_rate, std::size_t trials, double floor,
                               const std::vector<double>& grid, std::uint64_t seed, double margin) {
  GridCalibration g;
  for (double c : grid) {
    const double rate = phase_prediction_success(n, m, error_rate, c, trials, seed);
    g.curve.push_back({c, rate});
    if (rate >= floor) {
      g.value = margin * c;
      return g;
    }
  }
  g.value = grid.empty() ? 0.0 : margin * grid.back();
  return g;
}

GridCalibration calibrate_c_R(std::size_t n, std::size_t trials, double floor, const std::vector<double>& grid,
                              std::uint64_t seed) {
  GridCalibration g;
  for (double c : grid) {
    const auto N = static_cast<std::size_t>(std::ceil(c * double(n) * log2_or_one(double(n))));
    const double rate = connectivity_threshold_check(n, N, trials, seed);
    g.curve.push_back({c, rate});
    if (rate >= floor) {
      g.value = c;
      return g;
    }
  }
  g.value = grid.empty() ? 0.0 : grid.back();
  return g;
}

std::vector<ApproxDraw> compute_approx_draws(std::size_t n, std::size_t draws, std::size_t t_max,
                                             std::size_t rows, double C_L, double C2, std::uint64_t seed) {
  std::vector<ApproxDraw> out(draws);
  parallel_for(draws, [&](std::size_t d) {
    SeededStream s(seed, "compute-approx");
    s = s.child(d);
    SignalSpec spec;
    spec.n = n;
    spec.k = s.below(17, 0);
    spec.lo = 5;
    spec.hi = 50;
    spec.tail_model = TailModel::gaussian;
    spec.tail_sigma = 1.0;
    spec.seed = s.bits(1);
    const auto x = generate(spec).x;
    const std::size_t t = 1 + s.below(t_max, 2);
    MaskedLayerParams mp;
    mp.name = "ca";
    mp.n = n;
    mp.groups = rows;
    mp.rate = std::min(1.0, 1.0 / (C_L * double(t)));
    mp.pattern = {RowKind::gaussian};
    mp.seed = s.bits(3);
    MaskedLayer layer(mp);
    std::vector<cplx> lin(rows);
    layer.apply(x, lin.data());
    std::vector<double> mag(rows);
    for (std::size_t r = 0; r < rows; ++r) mag[r] = std::abs(lin[r]);
    const double tt = tail_norm(x, t, 2);
    const double tc = tail_norm(x, std::min(n, static_cast<std::size_t>(std::ceil(C2 * double(t)))), 2);
    out[d] = {compute_approx(mag), tt * tt / double(t), tc * tc / double(t)};
  });
  return out;
}

double sandwich_rate(const std::vector<ApproxDraw>& d, double C1) {
  std::size_t ok = 0;
  for (const auto& a : d)
    if (a.L <= a.upper * (1 + 1e-12) && a.L * C1 >= a.tail_C2) ++ok;
  return d.empty() ? 0.0 : double(ok) / double(d.size());
}

ApproxCalibration calibrate_compute_approx(std::size_t n, std::size_t draws, const L2Constants& lc, double floor,
                                           std::uint64_t seed, double margin) {
  ApproxCalibration out;
  out.C2 = lc.ca_C2;
  auto d = compute_approx_draws(n, draws, 32, lc.ca_rows, lc.C_L, lc.ca_C2, seed);
  std::vector<double> ratio;
  for (const auto& a : d) ratio.push_back(a.L > 0 ? a.tail_C2 / a.L : (a.tail_C2 > 0 ? INFINITY : 0.0));
  out.C1 = margin * quantile(ratio, floor);
  out.rate = sandwich_rate(d, out.C1);
  return out;
}

CalibrationReport calibrate_all(const Constants& base, bool quick) {
  CalibrationReport rep;
  rep.constants = base;
  auto& c = rep.constants;
  const std::uint64_t seed = base.calibration_seed;
  nlohmann::json j;

  PhaseGrid pg;
  if (quick) {
    pg.thetas = 90;
    pg.directions = 6;
  }
  auto ph = calibrate_phase(pg, base.phase);
  c.phase.c = std::ceil(ph.c * 10) / 10;
  c.phase.c0 = std::ceil(ph.c0 * 10) / 10;
  j["phase"] = {{"full_ratio", ph.full_ratio}, {"unsigned_ratio", ph.unsigned_ratio}, {"c", c.phase.c},
                {"c0", c.phase.c0}, {"evaluated", ph.evaluated}, {"max_error_by_eps", ph.full_by_eps}};
  c.oracle_grid_spec = "theta: " + std::to_string(pg.thetas) + " uniform, noise directions: " +
                       std::to_string(pg.directions) + "^3 worst-case sweep, magnitude ratios {0.1, 1, 10}";

  auto sp = calibrate_c_SP(256, 4, 1.0 / 3, quick ? 50 : 200, 0.99, {1, 1.5, 2, 2.5, 3, 4, 5, 6, 8}, seed);
  c.graph.c_SP = std::round(sp.value * 100) / 100;
  j["c_SP"] = {{"value", c.graph.c_SP}, {"curve", sp.curve}};

  auto cr = calibrate_c_R(1024, quick ? 200 : 2000, 0.999, {0.25, 0.5, 0.75, 1, 1.25, 1.5, 2, 3}, seed);
  c.graph.c_R = cr.value;
  j["c_R"] = {{"value", cr.value}, {"curve", cr.curve}};

  auto ca = calibrate_compute_approx(1024, quick ? 1000 : 10000, base.l2, 0.995, seed);
  c.l2.ca_C1 = std::ceil(ca.C1);
  j["compute_approx"] = {{"C1", c.l2.ca_C1}, {"C2", ca.C2}, {"rate", ca.rate}};
  rep.json = j.dump(2);
  return rep;
}

}  // namespace cpr
