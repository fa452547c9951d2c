#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "cpr/kernels.hpp"

namespace cpr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Index = std::uint64_t;

struct ComplexSignal {
  std::vector<cplx> values;

  ComplexSignal() = default;
  explicit ComplexSignal(std::size_t n) : values(n) {}
  explicit ComplexSignal(std::vector<cplx> v);
  std::size_t n() const { return values.size(); }
  cplx operator[](std::size_t i) const { return values[i]; }
};

struct SparseApprox {
  std::size_t n = 0;
  std::vector<Index> support;  // sorted
  std::vector<cplx> values;

  static SparseApprox from_pairs(std::size_t n, std::vector<std::pair<Index, cplx>> pairs);
  static SparseApprox from_dense(const ComplexSignal& x);
  ComplexSignal to_dense() const;
  std::size_t size() const { return support.size(); }
};

double wrap_phase(double theta);          // into [0, 2pi)
double circ_dist(double a, double b);     // in [0, pi]

struct PhaseSet {
  std::vector<double> phases;  // sorted in [0, 2pi)
  double eta = 0.0;
  bool equidistant = false;

  static PhaseSet from_list(std::vector<double> phases);
  static PhaseSet equidistant_set(std::size_t m, double offset = 0.0);
  std::size_t size() const { return phases.size(); }
  double distance_to(double theta) const;
};

struct EtaDistinctResult {
  bool ok = true;
  // (i, j, l) indices into the input list for a failure of condition (ii);
  // for a gap failure l = i.
  std::optional<std::array<std::size_t, 3>> witness;
  std::string reason;
};

EtaDistinctResult is_eta_distinct(const std::vector<double>& phases, double eta);

std::vector<Index> head_indices(const ComplexSignal& x, std::size_t k);
double tail_norm(const ComplexSignal& x, std::size_t k, int p);

enum class ErrorNorm { linf, l2, l1_real };

double phase_error(const ComplexSignal& x, const SparseApprox& xhat, ErrorNorm norm);
double phase_error(const ComplexSignal& x, const ComplexSignal& xhat, ErrorNorm norm);

enum class TailModel { zero, gaussian, power_law };
enum class TailPhase { uniform, phase_set };

struct SignalSpec {
  std::size_t n = 0;
  std::size_t k = 0;
  TailModel tail_model = TailModel::zero;
  double tail_sigma = 0.0;   // gaussian: E|x_i|^2 = sigma^2
  double tail_alpha = 1.0;   // power law exponent
  double tail_scale = 0.0;   // power law: magnitude of the largest tail entry
  TailPhase tail_phase = TailPhase::uniform;
  PhaseSet phase_set = PhaseSet::equidistant_set(1);
  double lo = 1.0, hi = 1.0;
  std::uint64_t seed = 0;
};

struct GeneratedSignal {
  ComplexSignal x;
  std::vector<Index> support;  // planted head, sorted
};

GeneratedSignal generate(const SignalSpec& spec);

std::string signal_to_json(const ComplexSignal& x);
ComplexSignal signal_from_json(const std::string& text);
std::vector<unsigned char> signal_to_binary(const ComplexSignal& x);
ComplexSignal signal_from_binary(const std::vector<unsigned char>& bytes);
void save_signal(const ComplexSignal& x, const std::string& path);
ComplexSignal load_signal(const std::string& path);

}  // namespace cpr
