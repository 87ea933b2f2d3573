#include "bioreactor/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <vector>

#include "bioreactor/error.hpp"

namespace bioreactor {

namespace {

double relative_residual(const SparseMatrix& a, const VectorXd& b, const VectorXd& x) {
  const double bn = b.norm();
  const double rn = (b - a * x).norm();
  return bn > 0.0 ? rn / bn : rn;
}

}  // namespace

LinearSolveReport LinearSolver::solve(const SparseMatrix& a, const VectorXd& b, VectorXd& x) const {
  LinearSolveReport report;
  if (a.rows() <= direct_limit_) {
    Eigen::SparseMatrix<double, Eigen::ColMajor> col = a;
    Eigen::SparseLU<Eigen::SparseMatrix<double, Eigen::ColMajor>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(col);
    if (lu.info() != Eigen::Success) {
      throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage(), {});
    }
    x = lu.solve(b);
    report.direct = true;
    report.iterations = 1;
  } else {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> krylov;
    krylov.setTolerance(tolerance_);
    krylov.setMaxIterations(max_iterations_);
    krylov.compute(a);
    x = x.size() == b.size() ? VectorXd(krylov.solveWithGuess(b, x)) : VectorXd(krylov.solve(b));
    report.direct = false;
    report.iterations = static_cast<int>(krylov.iterations());
  }
  report.relative_residual = relative_residual(a, b, x);
  if (!x.allFinite() || report.relative_residual > tolerance_) {
    throw SolverError("linear solve did not reach relative residual " + std::to_string(tolerance_) + " (got " +
                          std::to_string(report.relative_residual) + " after " +
                          std::to_string(report.iterations) + " iterations)",
                      {report.relative_residual});
  }
  return report;
}

}  // namespace bioreactor
