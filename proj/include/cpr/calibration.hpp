#pragma once

#include <string>
#include <vector>

#include "cpr/constants.hpp"

namespace cpr {

// Worst-case sweep of the relative phase estimators. x = 1, y = r e^{i theta}, each noise
// term has magnitude eps min(1, r) and a direction from a directions^3 grid.
struct PhaseGrid {
  std::size_t thetas = 720;
  std::size_t directions = 12;
  std::vector<double> ratios = {0.1, 1.0, 10.0};
  std::vector<double> eps = {1.0 / 9, 0.05, 0.01};
};

struct PhaseCalibration {
  double full_ratio = 0.0;      // max |theta^ - theta| / eps of estimate_full_phase
  double unsigned_ratio = 0.0;  // max ||theta^| - |theta|| / sqrt(eps) of estimate_unsigned_phase
  std::vector<double> full_by_eps;  // max error per eps, same order as the grid
  double c = 0.0, c0 = 0.0;     // ratios times the margin
  std::size_t evaluated = 0;
};

PhaseCalibration calibrate_phase(const PhaseGrid& grid, const PhaseConstants& base, double margin = 1.2);

// n vertices, uniform pairs, exactly round(samples / 3) (error_rate) estimates replaced by a
// wrong phase of the m-equidistant set; fraction of trials with every difference right
double phase_prediction_success(std::size_t n, std::size_t m, double error_rate, double c_SP, std::size_t trials,
                                std::uint64_t seed);

struct GridCalibration {
  double value = 0.0;  // smallest grid value reaching the floor, times the margin
  std::vector<std::pair<double, double>> curve;  // (grid value, rate)
};

GridCalibration calibrate_c_SP(std::size_t n, std::size_t m, double error_rate, std::size_t trials, double floor,
                               const std::vector<double>& grid, std::uint64_t seed, double margin = 1.2);
GridCalibration calibrate_c_R(std::size_t n, std::size_t trials, double floor, const std::vector<double>& grid,
                              std::uint64_t seed);

// ComputeApprox draws: gaussian-tail signal with a random number of planted heads and
// a random t in [1, t_max]
struct ApproxDraw {
  double L = 0.0;
  double upper = 0.0;  // ||x_{-t}||^2 / t
  double tail_C2 = 0.0;  // ||x_{-C2 t}||^2 / t
};

std::vector<ApproxDraw> compute_approx_draws(std::size_t n, std::size_t draws, std::size_t t_max,
                                             std::size_t rows, double C_L, double C2, std::uint64_t seed);
double sandwich_rate(const std::vector<ApproxDraw>& d, double C1);

struct ApproxCalibration {
  double C1 = 0.0, C2 = 0.0;
  double rate = 0.0;
};

ApproxCalibration calibrate_compute_approx(std::size_t n, std::size_t draws, const L2Constants& lc, double floor,
                                           std::uint64_t seed, double margin = 1.2);

struct CalibrationReport {
  Constants constants;
  std::string json;
};

// runs all calibrations above and returns the updated constants
CalibrationReport calibrate_all(const Constants& base, bool quick);

}  // namespace cpr
