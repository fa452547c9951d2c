#include "cpr/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr::oracle {

std::vector<double> DenseMatrix::measure(const ComplexSignal& x) const {
  if (x.n() != cols) throw std::invalid_argument("oracle: signal length mismatch");
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    cplx s{};
    for (std::size_t c = 0; c < cols; ++c) s += a[r * cols + c] * x[c];
    y[r] = std::abs(s);
  }
  return y;
}

DenseMatrix materialize(const Layer& layer) {
  DenseMatrix m;
  m.rows = layer.rows();
  m.cols = layer.cols();
  if (m.cols && m.rows > kMaxDenseEntries / m.cols) throw std::length_error("oracle: dense matrix too large");
  m.a.resize(m.rows * m.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) m.a[r * m.cols + c] = layer.entry(r, c);
  return m;
}

DenseMatrix materialize(const LayerStack& stack) {
  DenseMatrix m;
  m.rows = stack.rows();
  m.cols = stack.cols();
  if (m.cols && m.rows > kMaxDenseEntries / m.cols) throw std::length_error("oracle: dense matrix too large");
  m.a.reserve(m.rows * m.cols);
  for (const auto& l : stack.layers()) {
    auto d = materialize(*l);
    m.a.insert(m.a.end(), d.a.begin(), d.a.end());
  }
  return m;
}

namespace {

struct Search {
  const std::vector<double>& y;
  const DenseMatrix& A;
  const PhaseSet& grid;
  const std::vector<double>& mags;
  std::vector<Index> supp;
  std::vector<cplx> vals, acc;  // acc: A z for the current partial choice
  double best = INFINITY;
  std::vector<Index> best_supp;
  std::vector<cplx> best_vals;

  void score() {
    double e = 0;
    for (std::size_t r = 0; r < A.rows && e < best; ++r) {
      const double d = std::abs(acc[r]) - y[r];
      e += d * d;
    }
    if (e < best - 1e-12) {
      best = e;
      best_supp = supp;
      best_vals = vals;
    }
  }

  void add(Index c, cplx v, double sgn) {
    for (std::size_t r = 0; r < A.rows; ++r) acc[r] += sgn * A(r, c) * v;
  }

  void rec(Index from, std::size_t left) {
    score();
    if (left == 0) return;
    for (Index c = from; c < A.cols; ++c) {
      const std::size_t np = supp.empty() ? 1 : grid.size();
      for (std::size_t p = 0; p < np; ++p)
        for (double m : mags) {
          const cplx v = std::polar(m, grid.phases[p]);
          supp.push_back(c);
          vals.push_back(v);
          add(c, v, 1.0);
          rec(c + 1, left - 1);
          add(c, v, -1.0);
          supp.pop_back();
          vals.pop_back();
        }
    }
  }
};

}  // namespace

SparseApprox exhaustive_decode(const std::vector<double>& y, const DenseMatrix& A, std::size_t k,
                               const PhaseSet& grid, const std::vector<double>& mags) {
  if (A.cols > 12 || k > 3) throw std::length_error("oracle: exhaustive decode needs n <= 12, k <= 3");
  if (y.size() != A.rows) throw std::invalid_argument("oracle: measurement length mismatch");
  Search s{y, A, grid, mags, {}, {}, std::vector<cplx>(A.rows), INFINITY, {}, {}};
  s.rec(0, k);
  std::vector<std::pair<Index, cplx>> pairs;
  for (std::size_t j = 0; j < s.best_supp.size(); ++j) pairs.push_back({s.best_supp[j], s.best_vals[j]});
  return SparseApprox::from_pairs(A.cols, std::move(pairs));
}

double true_phase_diff(const ComplexSignal& x, Index i, Index j) {
  if (i >= x.n() || j >= x.n()) throw std::out_of_range("true_phase_diff: index");
  if (x[i] == cplx{} || x[j] == cplx{}) throw std::domain_error("true_phase_diff: zero coordinate");
  return wrap_phase(std::arg(x[j]) - std::arg(x[i]));
}

}  // namespace cpr::oracle
