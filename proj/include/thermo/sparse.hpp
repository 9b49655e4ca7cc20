#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "thermo/simd/kernels.hpp"

namespace thermo {

/// Square CSR matrix with a fixed sparsity pattern (sorted columns per row).
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Pattern from element connectivity: every pair of non-negative dofs that
  /// share an element is coupled. Negative dofs are ignored.
  static CsrMatrix from_elements(std::size_t rows, std::span<const std::int32_t> element_dofs,
                                 std::size_t dofs_per_element);

  std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const { return cols_.size(); }

  /// Adds to an existing pattern entry; the entry must exist.
  void add(std::int32_t row, std::int32_t col, double value);
  double at(std::int32_t row, std::int32_t col) const;
  std::vector<double> diagonal() const;
  void multiply(std::span<const double> x, std::span<double> y) const;

  simd::CsrView view() const { return {row_ptr_, cols_, vals_}; }

 private:
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;

  std::int64_t find(std::int32_t row, std::int32_t col) const;
};

struct SolveStats {
  int iterations = 0;
  double final_residual = 0.0;  // ||b - Ax|| / ||b||
  double wall_time = 0.0;       // seconds
  bool converged = false;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveStats stats) : std::runtime_error(what), stats_(stats) {}
  const SolveStats& stats() const { return stats_; }

 private:
  SolveStats stats_;
};

/// Matrix is singular (no Dirichlet data and nothing else pinning the solution).
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  double rel_tol = 1e-10;
  int max_iterations = 0;  // 0: 50 * sqrt(unknowns)
};

/// Jacobi-preconditioned conjugate gradient for SPD systems. `x` holds the
/// initial guess on entry. Throws SolverError if the cap is reached.
SolveStats pcg_solve(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolverOptions& options = {});

}  // namespace thermo
