#include "thermo/sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace thermo {

CsrMatrix CsrMatrix::from_elements(std::size_t rows, std::span<const std::int32_t> element_dofs,
                                   std::size_t dofs_per_element) {
  std::vector<std::vector<std::int32_t>> adj(rows);
  for (std::size_t e = 0; e + dofs_per_element <= element_dofs.size(); e += dofs_per_element) {
    const auto dofs = element_dofs.subspan(e, dofs_per_element);
    for (const auto r : dofs) {
      if (r < 0) continue;
      for (const auto c : dofs) {
        if (c >= 0) adj[r].push_back(c);
      }
    }
  }
  CsrMatrix m;
  m.row_ptr_.assign(rows + 1, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    auto& row = adj[r];
    row.push_back(static_cast<std::int32_t>(r));  // keep the diagonal even for isolated dofs
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    m.row_ptr_[r + 1] = m.row_ptr_[r] + static_cast<std::int64_t>(row.size());
  }
  m.cols_.reserve(static_cast<std::size_t>(m.row_ptr_[rows]));
  for (auto& row : adj) m.cols_.insert(m.cols_.end(), row.begin(), row.end());
  m.vals_.assign(m.cols_.size(), 0.0);
  return m;
}

std::int64_t CsrMatrix::find(std::int32_t row, std::int32_t col) const {
  const auto begin = cols_.begin() + row_ptr_[row];
  const auto end = cols_.begin() + row_ptr_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return -1;
  return it - cols_.begin();
}

void CsrMatrix::add(std::int32_t row, std::int32_t col, double value) {
  const auto k = find(row, col);
  if (k < 0) throw std::logic_error("CsrMatrix::add outside the sparsity pattern");
  vals_[k] += value;
}

double CsrMatrix::at(std::int32_t row, std::int32_t col) const {
  const auto k = find(row, col);
  return k < 0 ? 0.0 : vals_[k];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows());
  for (std::size_t r = 0; r < rows(); ++r) d[r] = at(static_cast<std::int32_t>(r), static_cast<std::int32_t>(r));
  return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const { simd::spmv(view(), x, y); }

SolveStats pcg_solve(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = a.rows();
  SolveStats stats;
  auto finish = [&] {
    stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
  };

  const double b_norm = std::sqrt(simd::dot(b, b));
  if (n == 0 || b_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    stats.converged = true;
    return finish();
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SingularSystemError("non-positive diagonal entry; matrix is not SPD");
    d = 1.0 / d;
  }

  const int cap = options.max_iterations > 0
                      ? options.max_iterations
                      : static_cast<int>(std::ceil(50.0 * std::sqrt(static_cast<double>(n))));
  const double target = options.rel_tol * b_norm;

  std::vector<double> r(n), z(n), p(n), q(n);
  // The recurrence residual can drift from the true one; restart from the
  // true residual until it also meets the target.
  for (int restart = 0; restart < 8; ++restart) {
    a.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double r_norm = std::sqrt(simd::dot(r, r));
    stats.final_residual = r_norm / b_norm;
    if (r_norm <= target) {
      stats.converged = true;
      break;
    }
    if (stats.iterations >= cap) break;
    simd::multiply(inv_diag, r, z);
    p = z;
    double rho = simd::dot(r, z);
    while (r_norm > target && stats.iterations < cap) {
      a.multiply(p, q);
      const double pq = simd::dot(p, q);
      if (!(pq > 0.0)) break;
      const double alpha = rho / pq;
      simd::axpy(alpha, p, x);
      simd::axpy(-alpha, q, r);
      simd::multiply(inv_diag, r, z);
      const double rho_next = simd::dot(r, z);
      simd::xpby(z, rho_next / rho, p);
      rho = rho_next;
      r_norm = std::sqrt(simd::dot(r, r));
      ++stats.iterations;
    }
  }
  finish();
  if (!stats.converged) {
    std::ostringstream msg;
    msg << "PCG did not converge: " << stats.iterations << " iterations, relative residual "
        << stats.final_residual << " (tolerance " << options.rel_tol << ")";
    throw SolverError(msg.str(), stats);
  }
  return stats;
}

}  // namespace thermo
