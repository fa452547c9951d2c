#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpr/signal.hpp"

namespace cpr {

class DegenerateMagnitude : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PhaseConstants {
  double c = 5.1;
  double c0 = 3.3;
};

enum class PhaseMode { unsigned_angle, signed_angle, full_circle };

struct PhaseEstimate {
  double theta = 0.0;  // [0, 2pi); arg y - arg x for the signed and full modes
  double error_bound = 0.0;
  PhaseMode mode = PhaseMode::unsigned_angle;
  bool out_of_range = false;
  int branch = -1;  // full mode: accepted window branch, -1 if neither
};

// Angle between x and y from |x|, |y|, |x + y|, in [0, pi].
double law_of_cosines_angle(double a, double b, double s);

PhaseEstimate estimate_unsigned_phase(double ax, double ay, double s, double eps, const PhaseConstants& pc);
// s0 = |x + y + n|, s1 = |x + e^{2c eps i} y + n|
PhaseEstimate estimate_signed_phase(double ax, double ay, double s0, double s1, double eps, const PhaseConstants& pc);
// s[j][l] = |x + e^{i(2c eps j + l pi/2)} y + n|
PhaseEstimate estimate_full_phase(double ax, double ay, const std::array<std::array<double, 2>, 2>& s, double eps,
                                  const PhaseConstants& pc);

struct RotatedSum {
  double psi;  // s = |x + e^{i psi} y + n|
  double s;
};

// Least-squares fit of (cos theta, sin theta) over any number of rotated sums. When
// every psi is 0 or pi only |theta| is identifiable and the result is unsigned.
PhaseEstimate fit_relative_phase(double ax, double ay, const std::vector<RotatedSum>& rows, double eps,
                                 const PhaseConstants& pc);

// Same four sums, fitting s^2 = C + u cos psi - v sin psi with a free constant C, so a
// noise term that does not rotate with psi cancels out. Needs no magnitudes.
PhaseEstimate estimate_full_phase_offset(const std::array<std::array<double, 2>, 2>& s, double eps,
                                         const PhaseConstants& pc);

// nearest phase of P and its distance; ties go to the smaller phase
std::pair<double, double> round_to_phase_set(double theta, const PhaseSet& P);

// sample minimizing the summed circular distance to all samples
double circular_median(const std::vector<double>& samples);

}  // namespace cpr
