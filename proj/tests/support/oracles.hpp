#pragma once

#include <Eigen/Dense>
#include <functional>

#include "bioreactor/timestepping.hpp"

namespace bioreactor::testing {

/// Maximum of f on a uniform grid of n + 1 points over [lo, hi].
double grid_scan_max(const std::function<double(double)>& f, double lo, double hi, int n);

/// Central difference (f(x + h) - f(x - h)) / (2 h).
double central_difference(const std::function<double(double)>& f, double x, double h);

/// Dense copy of the assembled species operator (matrix, source) at time t.
struct DenseOperator {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd source;
};
DenseOperator dense_species(const Mesh& mesh, const ScenarioConfig& config, Species species, double t);

/**
 * One implicit Euler step of the nonlinear system solved by Newton's method
 * on the dense 2n x 2n residual with the analytic Jacobian of mu(S) B.
 */
State newton_step(const Mesh& mesh, const ScenarioConfig& config, const State& state, double dt);

/**
 * Exact solution of du/dt = A u + b for time-independent A, b via the
 * exponential of the augmented matrix [[A, b], [0, 0]].
 */
Eigen::VectorXd linear_exact(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& u0,
                             double t);

/// Coupled dense generator of the linear system with frozen reaction field c.
DenseOperator dense_coupled(const Mesh& mesh, const ScenarioConfig& config, const Eigen::VectorXd& c, double t);

}  // namespace bioreactor::testing
