#include "cpr/constants.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "cpr/random.hpp"

namespace cpr {

NLOHMANN_JSON_SERIALIZE_ENUM(WeightKind, {{WeightKind::one, "one"},
                                          {WeightKind::sign, "sign"},
                                          {WeightKind::gaussian, "gaussian"},
                                          {WeightKind::phase, "phase"}})
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PhaseConstants, c, c0)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SketchConstants, cs_bucket_mult, cs_reps_per_log, hh_beam_mult,
                                                hh_bucket_mult, hh_reps, hh_weight, cm_width_mult, cm_reps_per_log, cm_cap_mult)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(NoiselessConstants, c_bucket, k_mult, alpha, c_R, hash_alpha, group_c)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LinfConstants, C_cs, C0, C1, C2, c_B, c_R, offset_fit, certify)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(L2Constants, C_hh, C_cs, C2, C_L, ca_rows, ca_C1, ca_C2, C0, c_bucket,
                                                C_B, C_rho, c_sp, C_Q, C_pc, C_noise, C_phase, C_dd, C1p, thres_mult,
                                                kappa, min_reps, eta_power)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(L1Constants, est_width_mult, est_d_per_log, rounds)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GraphConstants, c_SP, c_R)

Constants Constants::defaults() { return Constants{}; }

Constants Constants::strict() {
  Constants k;
  k.strict_paper = true;
  k.linf.C0 = 210;
  k.linf.C2 = 2 * std::ceil(1.61 * 210);
  k.linf.C1 = 16.0 * 16.0 * k.linf.C2;
  k.linf.offset_fit = false;
  k.linf.certify = false;
  k.l2.C_L = 110;
  k.l2.C0 = 210;
  k.l2.C_dd = 45;
  k.l2.C_noise = 1320;
  k.l2.C_phase = 1292;
  k.l2.C1p = 316;
  k.l2.ca_C1 = 19747;
  k.l2.ca_C2 = 353;
  k.l2.eta_power = 2;
  k.l2.C_B = 1.4;
  k.l2.C_rho = 0.7;
  k.l2.C_Q = 0.15;
  k.l2.C_pc = 2.0;
  return k;
}

std::string Constants::to_json() const {
  nlohmann::json j;
  j["version"] = version;
  j["c"] = phase.c;
  j["c0"] = phase.c0;
  j["calibration_seed"] = calibration_seed;
  j["oracle_grid_spec"] = oracle_grid_spec;
  j["strict_paper"] = strict_paper;
  j["sketch"] = sketch;
  j["noiseless"] = noiseless;
  j["linf"] = linf;
  j["l2"] = l2;
  j["l1"] = l1;
  j["graph"] = graph;
  return j.dump(2);
}

Constants Constants::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Constants k;
  k.version = j.value("version", k.version);
  k.phase.c = j.value("c", k.phase.c);
  k.phase.c0 = j.value("c0", k.phase.c0);
  k.calibration_seed = j.value("calibration_seed", k.calibration_seed);
  k.oracle_grid_spec = j.value("oracle_grid_spec", k.oracle_grid_spec);
  k.strict_paper = j.value("strict_paper", false);
  if (j.contains("sketch")) k.sketch = j["sketch"].get<SketchConstants>();
  if (j.contains("noiseless")) k.noiseless = j["noiseless"].get<NoiselessConstants>();
  if (j.contains("linf")) k.linf = j["linf"].get<LinfConstants>();
  if (j.contains("l2")) k.l2 = j["l2"].get<L2Constants>();
  if (j.contains("l1")) k.l1 = j["l1"].get<L1Constants>();
  if (j.contains("graph")) k.graph = j["graph"].get<GraphConstants>();
  if (!(k.phase.c > 0) || !(k.phase.c0 > 0)) throw ConfigError("constants: c and c0 must be positive");
  return k;
}

Constants Constants::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("constants: cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("constants: ") + e.what());
  }
}

void Constants::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_json() << "\n";
}

std::string Constants::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json())));
  return buf;
}

}  // namespace cpr
