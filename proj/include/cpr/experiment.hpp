#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cpr/constants.hpp"
#include "cpr/signal.hpp"

namespace cpr {

enum class Scheme { noiseless, linf_l2, l2_l2, l1_l1 };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& s);

extern const char* const kLibraryVersion;

struct ExperimentConfig {
  Scheme scheme = Scheme::noiseless;
  SignalSpec signal;         // signal.seed is replaced per trial
  std::size_t k = 1;         // decoder sparsity
  double eps = 0.5;          // linf: defaults to 0, which selects the decoder's default
  double delta = 0.1;
  PhaseSet P = PhaseSet::equidistant_set(2);
  double tradeoff_a = -1.0;  // noiseless bucket count
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::string constants_path;  // empty: built in defaults
  bool strict = false;
  std::string out;             // result prefix: <out>.csv, <out>.json, <out>.timing.json
  double gate = -1.0;          // minimum success rate for eval, < 0: scheme default
};

// Field errors carry the JSON path of the offending field, e.g. "signal.lo".
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);
double default_gate(Scheme s);
Constants resolve_constants(const ExperimentConfig& cfg);

// per-trial seeds, pure functions of the config seed
std::uint64_t signal_seed(std::uint64_t seed, std::size_t trial);
std::uint64_t ensemble_seed(std::uint64_t seed, std::size_t trial);
ComplexSignal trial_signal(const ExperimentConfig& cfg, std::size_t trial);

struct DecodeOutput {
  SparseApprox xhat;
  bool ok = false;
  std::string summary;  // short diagnostics, no commas
};

// ensemble of one scheme; measure and decode see only this object and y
class Pipeline {
 public:
  virtual ~Pipeline() = default;
  virtual std::uint64_t rows() const = 0;
  virtual const LayerStack& stack() const = 0;
  virtual PhaselessMeasurements measure(const ComplexSignal& x) const = 0;
  virtual DecodeOutput decode(const PhaselessMeasurements& y) const = 0;
};

std::unique_ptr<Pipeline> make_pipeline(const ExperimentConfig& cfg, const Constants& c, std::uint64_t seed);

struct Guarantee {
  std::string name;  // exact, linf, l2, l1
  double error = 0.0;
  double bound = 0.0;
  bool success = false;
};

// the scheme's guarantee for x against xhat
Guarantee evaluate(Scheme s, const ExperimentConfig& cfg, const ComplexSignal& x, const SparseApprox& xhat);

struct TrialRecord {
  std::size_t trial = 0;
  bool success = false;
  std::string guarantee;
  double err_linf = 0.0, err_l2 = 0.0, err_l1 = 0.0;  // err_l1 only for l1_l1, NaN otherwise
  double bound = 0.0;
  std::uint64_t m = 0;
  double decode_seconds = 0.0;  // written to the timing file only
  bool decoder_ok = false;
  std::string summary;
};

TrialRecord run_trial(const ExperimentConfig& cfg, const Constants& c, std::size_t trial);

struct ExperimentResult {
  std::vector<TrialRecord> records;  // in trial order
  double success_rate = 0.0;
  std::uint64_t m = 0;
  bool interrupted = false;
  std::string constants_hash;
  std::string csv, json, timing_json;  // file contents
};

// column order of the CSV rows
extern const char* const kCsvColumns;

// Runs the trials on cfg.threads workers. A set `stop` flag ends the run after the
// trials in flight; the result then holds the completed prefix.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::atomic<bool>* stop = nullptr);
void write_result(const ExperimentResult& r, const std::string& prefix);

// grid: JSON object mapping dotted field paths to arrays of values
struct SweepResult {
  std::vector<std::string> files;  // result prefixes
  std::vector<double> success_rate;
  std::string index_json;
};

SweepResult sweep(const std::string& config_json, const std::string& grid_json, const std::string& out_dir,
                  const std::atomic<bool>* stop = nullptr);

std::string measurements_to_json(const PhaselessMeasurements& y);
PhaselessMeasurements measurements_from_json(const std::string& text);
std::string approx_to_json(const SparseApprox& x);

}  // namespace cpr
