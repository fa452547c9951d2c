#include "cpr/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cpr {

namespace {
constexpr double kPi = std::numbers::pi;

bool in_window(double theta, double w) { return circ_dist(theta, 0.0) > w && circ_dist(theta, kPi) > w; }
}  // namespace

double law_of_cosines_angle(double a, double b, double s) {
  if (!(a > 0) || !(b > 0)) throw DegenerateMagnitude("law_of_cosines_angle: zero magnitude");
  double c = (a * a + b * b - s * s) / (2 * a * b);
  return kPi - std::acos(std::clamp(c, -1.0, 1.0));
}

PhaseEstimate estimate_unsigned_phase(double ax, double ay, double s, double eps, const PhaseConstants& pc) {
  PhaseEstimate e;
  e.theta = law_of_cosines_angle(ax, ay, s);
  e.error_bound = pc.c0 * std::sqrt(std::max(eps, 0.0));
  e.mode = PhaseMode::unsigned_angle;
  return e;
}

PhaseEstimate estimate_signed_phase(double ax, double ay, double s0, double s1, double eps, const PhaseConstants& pc) {
  const double beta = 2 * pc.c * eps;
  const double a0 = law_of_cosines_angle(ax, ay, s0);
  const double a1 = law_of_cosines_angle(ax, ay, s1);
  const double plus = std::abs(a1 - circ_dist(a0 + beta, 0.0));
  const double minus = std::abs(a1 - circ_dist(-a0 + beta, 0.0));
  PhaseEstimate e;
  e.mode = PhaseMode::signed_angle;
  e.error_bound = pc.c * eps;
  e.theta = plus <= minus ? a0 : wrap_phase(-a0);
  e.out_of_range = std::min(plus, minus) > 3 * pc.c * eps;
  return e;
}

PhaseEstimate estimate_full_phase(double ax, double ay, const std::array<std::array<double, 2>, 2>& s, double eps,
                                  const PhaseConstants& pc) {
  const double beta = 2 * pc.c * eps;
  const double w = 3 * pc.c * eps;
  PhaseEstimate b0 = estimate_signed_phase(ax, ay, s[0][0], s[1][0], eps, pc);
  PhaseEstimate b1 = estimate_signed_phase(ax, ay, s[0][1], s[1][1], eps, pc);
  const bool acc0 = !b0.out_of_range && in_window(b0.theta, w);
  const bool acc1 = !b1.out_of_range && in_window(b1.theta, w);

  // m_psi = s_psi^2 - ax^2 - ay^2 = u cos psi - v sin psi, (u, v) = 2 ax ay (cos theta, sin theta)
  const double psi[4] = {0.0, beta, kPi / 2, kPi / 2 + beta};
  const double sv[4] = {s[0][0], s[1][0], s[0][1], s[1][1]};
  double scc = 0, sss = 0, scs = 0, rc = 0, rs = 0;
  for (int t = 0; t < 4; ++t) {
    double m = sv[t] * sv[t] - ax * ax - ay * ay;
    double c = std::cos(psi[t]), sn = -std::sin(psi[t]);
    scc += c * c;
    sss += sn * sn;
    scs += c * sn;
    rc += m * c;
    rs += m * sn;
  }
  const double det = scc * sss - scs * scs;
  const double u = (sss * rc - scs * rs) / det;
  const double v = (scc * rs - scs * rc) / det;

  PhaseEstimate e;
  e.mode = PhaseMode::full_circle;
  e.error_bound = pc.c * eps;
  e.theta = (u == 0 && v == 0) ? 0.0 : wrap_phase(std::atan2(v, u));
  e.branch = acc0 ? 0 : (acc1 ? 1 : -1);
  e.out_of_range = !acc0 && !acc1;
  return e;
}

PhaseEstimate estimate_full_phase_offset(const std::array<std::array<double, 2>, 2>& s, double eps,
                                         const PhaseConstants& pc) {
  const double beta = 2 * pc.c * eps;
  const double psi[4] = {0.0, beta, kPi / 2, kPi / 2 + beta};
  const double sv[4] = {s[0][0], s[1][0], s[0][1], s[1][1]};
  // normal equations for (C, u, v), centred on the mean row
  double mc = 0, ms = 0, mm = 0;
  for (int t = 0; t < 4; ++t) {
    mc += std::cos(psi[t]) / 4;
    ms += -std::sin(psi[t]) / 4;
    mm += sv[t] * sv[t] / 4;
  }
  double scc = 0, sss = 0, scs = 0, rc = 0, rs = 0;
  for (int t = 0; t < 4; ++t) {
    double c = std::cos(psi[t]) - mc, sn = -std::sin(psi[t]) - ms, m = sv[t] * sv[t] - mm;
    scc += c * c;
    sss += sn * sn;
    scs += c * sn;
    rc += m * c;
    rs += m * sn;
  }
  const double det = scc * sss - scs * scs;
  PhaseEstimate e;
  e.mode = PhaseMode::full_circle;
  e.error_bound = pc.c * eps;
  if (!(det > 1e-12)) {
    e.out_of_range = true;
    return e;
  }
  const double u = (sss * rc - scs * rs) / det;
  const double v = (scc * rs - scs * rc) / det;
  e.theta = (u == 0 && v == 0) ? 0.0 : wrap_phase(std::atan2(v, u));
  return e;
}

PhaseEstimate fit_relative_phase(double ax, double ay, const std::vector<RotatedSum>& rows, double eps,
                                 const PhaseConstants& pc) {
  if (!(ax > 0) || !(ay > 0)) throw DegenerateMagnitude("fit_relative_phase: zero magnitude");
  if (rows.empty()) throw std::invalid_argument("fit_relative_phase: no rows");
  double scc = 0, sss = 0, scs = 0, rc = 0, rs = 0;
  for (const auto& r : rows) {
    double m = r.s * r.s - ax * ax - ay * ay;
    double c = std::cos(r.psi), sn = -std::sin(r.psi);
    scc += c * c;
    sss += sn * sn;
    scs += c * sn;
    rc += m * c;
    rs += m * sn;
  }
  PhaseEstimate e;
  const double det = scc * sss - scs * scs;
  if (sss < 1e-9 * double(rows.size()) || det < 1e-12 * double(rows.size() * rows.size())) {
    e.mode = PhaseMode::unsigned_angle;
    e.error_bound = pc.c0 * std::sqrt(std::max(eps, 0.0));
    e.theta = std::acos(std::clamp(rc / scc / (2 * ax * ay), -1.0, 1.0));
    return e;
  }
  const double u = (sss * rc - scs * rs) / det;
  const double v = (scc * rs - scs * rc) / det;
  e.mode = PhaseMode::full_circle;
  e.error_bound = pc.c * eps;
  e.theta = (u == 0 && v == 0) ? 0.0 : wrap_phase(std::atan2(v, u));
  return e;
}

std::pair<double, double> round_to_phase_set(double theta, const PhaseSet& P) {
  double best = P.phases.at(0), bd = circ_dist(theta, best);
  for (std::size_t j = 1; j < P.phases.size(); ++j) {
    double d = circ_dist(theta, P.phases[j]);
    if (d < bd - 1e-12) {
      bd = d;
      best = P.phases[j];
    }
  }
  return {best, bd};
}

double circular_median(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("circular_median: no samples");
  double best = samples[0], bs = INFINITY;
  for (double c : samples) {
    double tot = 0.0;
    for (double t : samples) tot += circ_dist(c, t);
    if (tot < bs - 1e-15) {
      bs = tot;
      best = c;
    }
  }
  return wrap_phase(best);
}

}  // namespace cpr
