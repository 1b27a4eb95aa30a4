#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcmlab/environment.hpp"

namespace rcm {

/// Sign-inverted generator on B_n with zero Dirichlet condition outside:
/// diagonal pi_x (including edges that leave B_n), off-diagonal -w_xy for
/// interior edges. Symmetric positive definite.
struct DirichletOperator {
  int d = 0;
  int n = 0;
  Box box;  // B_n site indexing
  std::vector<double> diag;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> off;  // -w entries, both orientations stored

  std::int64_t dim() const { return static_cast<std::int64_t>(diag.size()); }
  void apply(std::span<const double> x, std::span<double> y) const;
  double quad_form(std::span<const double> f) const;
};

DirichletOperator assemble_dirichlet_operator(const Environment& env, int n);

/// Dirichlet energy 1/2 sum_x sum_{y~x} w_xy (f(x)-f(y))^2 with f extended by
/// zero outside B_n; f is indexed over B_n.
double dirichlet_energy(const Environment& env, int n, std::span<const double> f);

/// Checked variant: f is indexed over the full padded box and must vanish
/// outside B_n (DomainError otherwise).
double dirichlet_energy_full(const Environment& env, int n, std::span<const double> f);

struct EigenPair {
  double lambda1 = 0.0;
  std::vector<double> psi1;  // unit l2, nonnegative
  double residual = 0.0;
  /// Attainable floor eps * || |A||psi| ||_2 of the residual in doubles; the
  /// convergence test is residual <= max(tol * lambda1, 8 * floor). Modes
  /// carried by a strong internal edge (two-site dumbbells) cancel two O(w)
  /// terms per row, so their residual cannot reach tol * lambda1.
  double residual_floor = 0.0;
  int iterations = 0;  // inverse-iteration steps
};

struct ConvergenceError : NumericalError {
  ConvergenceError(const std::string& what, EigenPair best_iterate)
      : NumericalError(what), best(std::move(best_iterate)) {}
  EigenPair best;
};

/// Principal eigenpair by inverse power iteration. The inner solves A u = v
/// reuse one sparse Cholesky factorization of the operator (heavy-tailed
/// disorder makes diagonally preconditioned Krylov solvers stall, so a direct
/// factorization is the reliable inner solver at these sizes). Stops when the
/// Rayleigh quotient's relative change is <= tol and the residual
/// ||A psi - lambda psi|| <= tol * lambda. The result is sign-normalized,
/// checked nonnegative to 1e-10 and clamped.
EigenPair principal_eigenpair(const DirichletOperator& op, double tol = 1e-10,
                              int max_iter = 10000);

struct DenseSpectrum {
  std::vector<double> eigenvalues;    // ascending
  std::vector<double> eigenvectors;   // column-major dim x dim
  std::int64_t dim = 0;

  std::span<const double> eigenvector(std::int64_t k) const {
    return {eigenvectors.data() + k * dim, static_cast<std::size_t>(dim)};
  }
};

/// Full symmetric eigendecomposition by a direct method; refuses dim > 4096.
DenseSpectrum dense_oracle(const DirichletOperator& op);

}  // namespace rcm
