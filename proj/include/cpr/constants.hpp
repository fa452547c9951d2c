#pragma once

#include <cstdint>
#include <string>

#include "cpr/ensemble.hpp"
#include "cpr/phase.hpp"

namespace cpr {

struct SketchConstants {
  double cs_bucket_mult = 6.0;  // buckets per rep = mult * K
  double cs_reps_per_log = 1.0; // reps = ceil(mult * log2 n), odd
  double hh_beam_mult = 4.0;    // |S| <= beam * K
  double hh_bucket_mult = 6.0;
  std::uint64_t hh_reps = 7;
  WeightKind hh_weight = WeightKind::phase;
  double cm_width_mult = 4.0;   // width = mult * k / eps
  double cm_reps_per_log = 1.0;
  double cm_cap_mult = 4.0;     // |S| <= cap * k / eps
};

struct NoiselessConstants {
  double c_bucket = 1.0;   // B = k / (c log k)
  double k_mult = 5.0;     // K = k_mult * log k
  double alpha = 4.0;
  double c_R = 2.0;
  double hash_alpha = 1.0; // independence = max(2, hash_alpha * k)
  double group_c = 2.0;    // stitch group size = group_c * B_occ * log B_occ edges
};

struct LinfConstants {
  double C_cs = 1.0;       // Count-Sketch K = C k / eps
  double C0 = 32.0;        // E eta_i = 1 / (C0 k)
  double C1 = 16.0 * 16.0 * 2.0;
  double C2 = 2.0;         // noiseless sub-ensemble sparsity C2 k
  double c_B = 1.0;        // B = c_B k / eps
  double c_R = 1.0;        // R = c_R log n
  bool offset_fit = true;  // fit a constant term with the four rotated sums
  bool certify = true;     // accept the noiseless branch whenever it reproduces y
};

struct L2Constants {
  double C_hh = 1.0;       // HH K = C k / eps
  double C_cs = 1.0;       // CS K = C' k / eps
  double C2 = 2.0;         // |S| = C2 k
  double C_L = 4.0;        // ComputeApprox rate 1 / (C_L t)
  std::uint64_t ca_rows = 64;
  double ca_C1 = 10.0;     // sandwich constants
  double ca_C2 = 4.0;
  double C0 = 0.01;        // prune
  double c_bucket = 1.0;   // B = 2^l / (c l)
  double C_B = 0.142;        // in-bucket rate eps eta^2 / (C_B l (...)^2)
  double C_rho = 0.1;       // rho_{r,l} multiplier
  double c_sp = 3.0;       // group size c_sp l ceil(log l)
  double C_Q = 0.025;        // Q_l multiplier
  double C_pc = 19.7;       // combine mask rate multiplier
  double C_noise = 1.0;
  double C_phase = 4.0;
  double C_dd = 3.0;       // C'' : phase-sublayer subsample rate 1/C''
  double C1p = 1.0;        // C_1' in L_thres
  double thres_mult = 1.0;
  double kappa = 4.0;      // stop G_B after kappa |T| edges
  std::uint64_t min_reps = 3;
  double eta_power = 0.0;  // exponent of eta in the rates, row counts and L_thres
};

struct L1Constants {
  double est_width_mult = 4.0;  // w = mult * k / eps^2 buckets per block
  double est_d_per_log = 1.0;   // d = ceil(mult * log2 n) blocks, odd
  std::uint64_t rounds = 0;     // 0: ceil(log2 k) + 2
};

struct GraphConstants {
  double c_SP = 3.6;
  double c_R = 0.75;
};

struct Constants {
  std::string version = "1";
  PhaseConstants phase;
  std::uint64_t calibration_seed = 20240601;
  std::string oracle_grid_spec = "theta: 720 uniform, noise directions: 12^3 worst-case sweep, magnitude ratios {0.1, 1, 10}";
  SketchConstants sketch;
  NoiselessConstants noiseless;
  LinfConstants linf;
  L2Constants l2;
  L1Constants l1;
  GraphConstants graph;
  bool strict_paper = false;

  static Constants defaults();
  static Constants strict();  // proof-scale constants
  std::string to_json() const;
  static Constants from_json(const std::string& text);
  static Constants load(const std::string& path);
  void save(const std::string& path) const;
  std::string hash() const;  // FNV-1a of the canonical JSON, hex
};

}  // namespace cpr
