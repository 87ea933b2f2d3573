#include "oracles.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <stdexcept>

namespace bioreactor::testing {

double grid_scan_max(const std::function<double(double)>& f, double lo, double hi, int n) {
  double best = f(lo);
  for (int i = 1; i <= n; ++i) {
    best = std::max(best, f(lo + (hi - lo) * i / n));
  }
  return best;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

DenseOperator dense_species(const Mesh& mesh, const ScenarioConfig& config, Species species, double t) {
  const TransportOperator op = assemble_species(mesh, config.transport, species, t);
  return DenseOperator{Eigen::MatrixXd(op.matrix), op.source};
}

State newton_step(const Mesh& mesh, const ScenarioConfig& config, const State& state, double dt) {
  const double t = state.t + dt;
  const DenseOperator ls = dense_species(mesh, config, Species::Substrate, t);
  const DenseOperator lb = dense_species(mesh, config, Species::Biomass, t);
  const auto n = state.S.size();
  const auto& mu = config.kinetics;
  Eigen::VectorXd s = state.S;
  Eigen::VectorXd b = state.B;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd growth(n), dgrowth_ds(n), rate(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rate[i] = mu.eval(s[i]);
      growth[i] = rate[i] * b[i];
      dgrowth_ds[i] = mu.derivative(s[i]) * b[i];
    }
    Eigen::VectorXd f(2 * n);
    f.head(n) = s - state.S - dt * (ls.matrix * s + ls.source - growth);
    f.tail(n) = b - state.B - dt * (lb.matrix * b + growth);
    Eigen::MatrixXd j = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    j.topLeftCorner(n, n) -= dt * ls.matrix;
    j.topLeftCorner(n, n).diagonal() += dt * dgrowth_ds;
    j.topRightCorner(n, n).diagonal() += dt * rate;
    j.bottomRightCorner(n, n) -= dt * lb.matrix;
    j.bottomLeftCorner(n, n).diagonal() -= dt * dgrowth_ds;
    j.bottomRightCorner(n, n).diagonal() -= dt * rate;
    const Eigen::VectorXd delta = j.fullPivLu().solve(f);
    s -= delta.head(n);
    b -= delta.tail(n);
    if (delta.norm() <= 1e-15 * (1.0 + s.norm() + b.norm())) {
      return State{t, s, b};
    }
  }
  throw std::runtime_error("Newton oracle did not converge");
}

Eigen::VectorXd linear_exact(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& u0,
                             double t) {
  const auto n = a.rows();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a * t;
  aug.topRightCorner(n, 1) = b * t;
  const Eigen::MatrixXd e = aug.exp();
  return e.topLeftCorner(n, n) * u0 + e.topRightCorner(n, 1);
}

DenseOperator dense_coupled(const Mesh& mesh, const ScenarioConfig& config, const Eigen::VectorXd& c, double t) {
  const DenseOperator ls = dense_species(mesh, config, Species::Substrate, t);
  const DenseOperator lb = dense_species(mesh, config, Species::Biomass, t);
  const auto n = c.size();
  DenseOperator out{Eigen::MatrixXd::Zero(2 * n, 2 * n), Eigen::VectorXd(2 * n)};
  out.matrix.topLeftCorner(n, n) = ls.matrix;
  out.matrix.topRightCorner(n, n).diagonal() = -c;
  out.matrix.bottomRightCorner(n, n) = lb.matrix;
  out.matrix.bottomRightCorner(n, n).diagonal() += c;
  out.source << ls.source, lb.source;
  return out;
}

}  // namespace bioreactor::testing
