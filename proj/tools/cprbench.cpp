// cprbench: generate -> measure -> decode -> evaluate, sweeps and calibration.
//
//   cprbench gen       --config c.json --trial 0 --out x.json
//   cprbench measure   --config c.json --signal x.json --out y.json
//   cprbench decode    --config c.json --measurements y.json --out xhat.json
//   cprbench eval      --config c.json --out results/run
//   cprbench sweep     --config c.json --grid g.json --out results/dir
//   cprbench calibrate --out constants.json [--quick]
//
// Exit codes: 0 success, 1 runtime failure, 2 config error, 3 eval gate failure.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cpr/calibration.hpp"
#include "cpr/experiment.hpp"
#include "json.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cpr::ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cpr::ConfigError("cannot write " + path);
  out << text;
}

struct Common {
  std::string config, out, constants;
  long long trials = -1, seed = -1, threads = -1;
  std::size_t trial = 0;
  bool strict = false;

  void add(CLI::App* app, bool with_config = true) {
    if (with_config) app->add_option("--config", config, "experiment config (JSON)")->required();
    app->add_option("--out", out, "output path");
    app->add_option("--trials", trials, "number of trials");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--threads", threads, "worker threads");
    app->add_option("--constants", constants, "constants file");
    app->add_flag("--strict-paper-constants", strict, "use proof-scale constants");
  }

  cpr::ExperimentConfig load() const {
    auto text = read_file(config);
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw cpr::ConfigError("config: invalid JSON in " + config);
    if (trials >= 0) j["trials"] = trials;
    if (seed >= 0) j["seed"] = seed;
    if (threads >= 0) j["threads"] = threads;
    if (!constants.empty()) j["constants"] = constants;
    if (strict) j["strict"] = true;
    if (!out.empty()) j["out"] = out;
    return cpr::config_from_json(j.dump());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"combinatorial compressive phase retrieval benchmark"};
  app.require_subcommand(1);

  Common gen, meas, dec, ev, sw, cal;
  std::string signal_path, meas_path, grid_path, report_path;
  bool quick = false;

  auto* g = app.add_subcommand("gen", "write the signal of one trial");
  gen.add(g);
  g->add_option("--trial", gen.trial, "trial index");

  auto* m = app.add_subcommand("measure", "measure a signal with the ensemble of one trial");
  meas.add(m);
  m->add_option("--trial", meas.trial, "trial index");
  m->add_option("--signal", signal_path, "signal file")->required();

  auto* d = app.add_subcommand("decode", "decode measurements with the ensemble of one trial");
  dec.add(d);
  d->add_option("--trial", dec.trial, "trial index");
  d->add_option("--measurements", meas_path, "measurements file")->required();

  auto* e = app.add_subcommand("eval", "run all trials, write results, check the success gate");
  ev.add(e);

  auto* s = app.add_subcommand("sweep", "run the cartesian product of a parameter grid");
  sw.add(s);
  s->add_option("--grid", grid_path, "grid JSON: {\"field.path\": [values]}")->required();

  auto* c = app.add_subcommand("calibrate", "run the calibration oracles and write the constants file");
  cal.add(c, false);
  c->add_flag("--quick", quick, "coarse grids");
  c->add_option("--report", report_path, "calibration report (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*g) {
      auto cfg = gen.load();
      auto x = cpr::trial_signal(cfg, gen.trial);
      if (gen.out.empty()) throw cpr::ConfigError("out: required");
      cpr::save_signal(x, gen.out);
      std::printf("signal n=%zu trial=%zu -> %s\n", x.n(), gen.trial, gen.out.c_str());
    } else if (*m) {
      auto cfg = meas.load();
      if (meas.out.empty()) throw cpr::ConfigError("out: required");
      auto x = cpr::load_signal(signal_path);
      if (x.n() != cfg.signal.n) throw cpr::ConfigError("signal.n: file has n=" + std::to_string(x.n()));
      auto p = cpr::make_pipeline(cfg, cpr::resolve_constants(cfg), cpr::ensemble_seed(cfg.seed, meas.trial));
      auto y = p->measure(x);
      write_file(meas.out, cpr::measurements_to_json(y));
      std::printf("m=%llu -> %s\n", static_cast<unsigned long long>(p->rows()), meas.out.c_str());
    } else if (*d) {
      auto cfg = dec.load();
      if (dec.out.empty()) throw cpr::ConfigError("out: required");
      auto y = cpr::measurements_from_json(read_file(meas_path));
      auto p = cpr::make_pipeline(cfg, cpr::resolve_constants(cfg), cpr::ensemble_seed(cfg.seed, dec.trial));
      if (y.size() != p->rows()) throw cpr::ConfigError("measurements: expected " + std::to_string(p->rows()) + " rows");
      auto r = p->decode(y);
      write_file(dec.out, cpr::approx_to_json(r.xhat));
      std::printf("%s: support %zu (%s) -> %s\n", r.ok ? "ok" : "failed", r.xhat.size(), r.summary.c_str(),
                  dec.out.c_str());
    } else if (*e) {
      auto cfg = ev.load();
      auto r = cpr::run_experiment(cfg, &g_stop);
      if (!cfg.out.empty()) cpr::write_result(r, cfg.out);
      const double gate = cfg.gate >= 0 ? cfg.gate : cpr::default_gate(cfg.scheme);
      const bool pass = !r.interrupted && r.success_rate >= gate;
      std::size_t ok = 0;
      for (const auto& t : r.records) ok += t.success;
      std::printf("%s %s: success %zu/%zu = %.4f (gate %.4f) m=%llu%s\n", pass ? "PASS" : "FAIL",
                  cpr::scheme_name(cfg.scheme), ok, r.records.size(), r.success_rate, gate, static_cast<unsigned long long>(r.m),
                  r.interrupted ? " (interrupted)" : "");
      return pass ? 0 : 3;
    } else if (*s) {
      auto base = sw.load();
      if (base.out.empty()) throw cpr::ConfigError("out: required");
      auto j = nlohmann::json::parse(read_file(sw.config));
      if (sw.trials >= 0) j["trials"] = sw.trials;
      if (sw.seed >= 0) j["seed"] = sw.seed;
      if (sw.threads >= 0) j["threads"] = sw.threads;
      if (!sw.constants.empty()) j["constants"] = sw.constants;
      if (sw.strict) j["strict"] = true;
      auto r = cpr::sweep(j.dump(), read_file(grid_path), base.out, &g_stop);
      for (std::size_t i = 0; i < r.files.size(); ++i)
        std::printf("%s success %.4f\n", r.files[i].c_str(), r.success_rate[i]);
    } else if (*c) {
      auto base = cal.strict ? cpr::Constants::strict()
                             : (cal.constants.empty() ? cpr::Constants::defaults() : cpr::Constants::load(cal.constants));
      if (cal.seed >= 0) base.calibration_seed = static_cast<std::uint64_t>(cal.seed);
      auto rep = cpr::calibrate_all(base, quick);
      if (cal.out.empty()) throw cpr::ConfigError("out: required");
      rep.constants.save(cal.out);
      if (!report_path.empty()) write_file(report_path, rep.json + "\n");
      std::printf("%s\nconstants -> %s (hash %s)\n", rep.json.c_str(), cal.out.c_str(), rep.constants.hash().c_str());
    }
  } catch (const cpr::ConfigError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
