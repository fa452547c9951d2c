#pragma once

#include <vector>

#include "cpr/ensemble.hpp"

namespace cpr::oracle {

struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<cplx> a;  // row-major
  cplx operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  std::vector<double> measure(const ComplexSignal& x) const;  // |A x|
};

inline constexpr std::size_t kMaxDenseEntries = std::size_t{1} << 24;

// entry by entry through Layer::entry, never through column()
DenseMatrix materialize(const Layer& layer);
DenseMatrix materialize(const LayerStack& stack);

// argmin over supports of size <= k, phases in grid and magnitudes in mags of
// || |A z| - y ||_2; the first support element carries grid.phases[0]
SparseApprox exhaustive_decode(const std::vector<double>& y, const DenseMatrix& A, std::size_t k,
                               const PhaseSet& grid, const std::vector<double>& mags);

// arg x_j - arg x_i in [0, 2pi)
double true_phase_diff(const ComplexSignal& x, Index i, Index j);

}  // namespace cpr::oracle
