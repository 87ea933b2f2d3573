#pragma once

#include "bioreactor/discretization.hpp"

namespace bioreactor {

struct LinearSolveReport {
  bool direct = true;
  int iterations = 0;
  double relative_residual = 0.0;
};

/**
 * Sparse LU factorization up to `direct_limit` unknowns, BiCGSTAB with a
 * diagonal (Jacobi) preconditioner above it. Throws SolverError when the
 * relative residual stays above the tolerance.
 */
class LinearSolver {
 public:
  LinearSolver(double tolerance, int max_iterations, Eigen::Index direct_limit = 2000)
      : tolerance_(tolerance), max_iterations_(max_iterations), direct_limit_(direct_limit) {}

  LinearSolveReport solve(const SparseMatrix& a, const VectorXd& b, VectorXd& x) const;

  double tolerance() const noexcept { return tolerance_; }

 private:
  double tolerance_;
  int max_iterations_;
  Eigen::Index direct_limit_;
};

}  // namespace bioreactor
