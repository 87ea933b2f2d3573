#include "bioreactor/verification.hpp"

#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bioreactor/error.hpp"
#include "bioreactor/format.hpp"

namespace bioreactor {

namespace {

double poly(const std::vector<double>& c, double z, int derivative) {
  double sum = 0.0;
  for (std::size_t k = static_cast<std::size_t>(derivative); k < c.size(); ++k) {
    double factor = 1.0;
    for (int d = 0; d < derivative; ++d) {
      factor *= static_cast<double>(k - static_cast<std::size_t>(d));
    }
    sum += factor * c[k] * std::pow(z, static_cast<double>(k - static_cast<std::size_t>(derivative)));
  }
  return sum;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void finish_study(StudyResult& study, bool by_h) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < study.levels.size(); ++i) {
    auto& level = study.levels[i];
    const double x = by_h ? level.h : level.dt;
    if (i == 0) {
      level.order = std::numeric_limits<double>::quiet_NaN();
    } else {
      const auto& prev = study.levels[i - 1];
      const double px = by_h ? prev.h : prev.dt;
      level.order = std::log(prev.error / level.error) / std::log(px / x);
      study.monotone = study.monotone && level.error < prev.error;
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(level.error));
  }
  study.observed_order = least_squares_slope(lx, ly);
  study.conclusive = study.monotone && std::isfinite(study.observed_order);
}

int steps_for(double final_time, double dt) {
  return std::max(1, static_cast<int>(std::ceil(final_time / dt - 1e-9)));
}

}  // namespace

double MMSCase::exact(Species s, double z, double t) const {
  return poly(s == Species::Substrate ? substrate : biomass, z, 0) * std::exp(rate * t);
}

double MMSCase::exact_dz(Species s, double z, double t) const {
  return poly(s == Species::Substrate ? substrate : biomass, z, 1) * std::exp(rate * t);
}

double MMSCase::exact_dzz(Species s, double z, double t) const {
  return poly(s == Species::Substrate ? substrate : biomass, z, 2) * std::exp(rate * t);
}

double MMSCase::exact_dt(Species s, double z, double t) const { return rate * exact(s, z, t); }

ManufacturedForcing MMSCase::forcing() const {
  const MMSCase self = *this;
  ManufacturedForcing f;
  f.volumetric = [self](Species s, const Vec2& x, double t) {
    const double d = s == Species::Substrate ? self.diffusion_substrate : self.diffusion_biomass;
    const double reaction = self.kinetics.eval(self.exact(Species::Substrate, x.z, t)) *
                            self.exact(Species::Biomass, x.z, t);
    const double transport = self.exact_dt(s, x.z, t) - d * self.exact_dzz(s, x.z, t) -
                             self.flow * self.exact_dz(s, x.z, t);
    return s == Species::Substrate ? transport + reaction : transport - reaction;
  };
  f.boundary_flux = [self](Species s, BoundaryTag tag, const Vec2& x, double t) {
    const double d = s == Species::Substrate ? self.diffusion_substrate : self.diffusion_biomass;
    switch (tag) {
      case BoundaryTag::Inlet: return d * self.exact_dz(s, x.z, t) + self.flow * self.exact(s, x.z, t);
      case BoundaryTag::Outlet: return -d * self.exact_dz(s, x.z, t);
      case BoundaryTag::Wall: return 0.0;
    }
    return 0.0;
  };
  return f;
}

ScenarioConfig MMSCase::config(int n_axial, double dt) const {
  ScenarioConfig c;
  c.mesh.mode = mode;
  c.mesh.length = length;
  c.mesh.radius = radius;
  c.mesh.n_axial = n_axial;
  c.mesh.n_radial = mode == MeshMode::Axial1D ? 1 : 2;
  c.transport.diffusion_substrate = diffusion_substrate;
  c.transport.diffusion_biomass = diffusion_biomass;
  c.transport.flow = FlowField::constant(flow);
  c.transport.inlet = InletSchedule::constant(0.0);
  c.transport.scheme = scheme;
  c.kinetics = kinetics;
  c.final_time = final_time;
  c.solver.dt = dt;
  c.invariant_checks = false;
  const Mesh mesh(c.mesh);
  const State start = exact_state(mesh, 0.0);
  c.initial_substrate.value = std::vector<double>(start.S.data(), start.S.data() + start.S.size());
  c.initial_biomass.value = std::vector<double>(start.B.data(), start.B.data() + start.B.size());
  return c;
}

State MMSCase::exact_state(const Mesh& mesh, double t) const {
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  State s{t, VectorXd(n), VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = mesh.cells()[static_cast<std::size_t>(i)].center.z;
    s.S[i] = exact(Species::Substrate, z, t);
    s.B[i] = exact(Species::Biomass, z, t);
  }
  return s;
}

MMSCase diffusion_mms_case() {
  MMSCase m;
  m.substrate = {1.0, 0.0, 0.5, -0.25};
  m.biomass = {0.5, 0.2, -0.3, 0.1};
  m.rate = -0.5;
  m.diffusion_substrate = 0.1;
  m.diffusion_biomass = 0.05;
  m.flow = 0.0;
  m.kinetics = GrowthRateModel::zero();
  m.scheme = AdvectionScheme::Central;
  m.final_time = 0.5;
  return m;
}

MMSCase advection_mms_case() {
  MMSCase m;
  m.substrate = {1.0, 0.5, 0.5, -0.25};
  m.biomass = {0.5, 0.2, -0.3, 0.1};
  m.rate = -0.5;
  m.diffusion_substrate = 0.02;
  m.diffusion_biomass = 0.02;
  m.flow = 1.0;
  m.kinetics = GrowthRateModel::monod(1.0, 0.5);
  m.scheme = AdvectionScheme::Upwind;
  m.final_time = 0.5;
  return m;
}

double state_error(const Mesh& mesh, const State& a, const State& b) {
  const VectorXd v = cell_volumes(mesh);
  return std::sqrt(v.dot((a.S - b.S).cwiseAbs2()) + v.dot((a.B - b.B).cwiseAbs2()));
}

StudyResult run_mms_study(const MMSCase& mms, const std::vector<int>& levels,
                          const std::function<double(double)>& dt_rule) {
  if (levels.size() < 3) {
    throw ConfigError("levels", "a convergence study needs at least 3 refinement levels");
  }
  const ManufacturedForcing forcing = mms.forcing();
  StudyResult study;
  for (int n : levels) {
    const double h = mms.length / n;
    const int steps = steps_for(mms.final_time, dt_rule(h));
    const double dt = mms.final_time / steps;
    const ScenarioConfig cfg = mms.config(n, dt);
    const Mesh mesh(cfg.mesh);
    const Trajectory traj = integrate(mesh, cfg, &forcing);
    const double error = state_error(mesh, traj.final(), mms.exact_state(mesh, traj.final().t));
    study.levels.push_back(StudyLevel{n, h, dt, error, 0.0});
  }
  finish_study(study, true);
  return study;
}

StudyResult run_temporal_study(const MMSCase& mms, int n_axial, const std::vector<double>& dts) {
  if (dts.size() < 3) {
    throw ConfigError("dts", "a convergence study needs at least 3 refinement levels");
  }
  const ManufacturedForcing forcing = mms.forcing();
  std::vector<State> finals;
  std::vector<double> used;
  std::vector<double> requested = dts;
  requested.push_back(dts.back() / 2.0);
  Mesh mesh(mms.config(n_axial, requested.front()).mesh);
  for (double dt_request : requested) {
    const double dt = mms.final_time / steps_for(mms.final_time, dt_request);
    const ScenarioConfig cfg = mms.config(n_axial, dt);
    finals.push_back(integrate(mesh, cfg, &forcing).final());
    used.push_back(dt);
  }
  StudyResult study;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    study.levels.push_back(StudyLevel{n_axial, mms.length / n_axial, used[i], state_error(mesh, finals[i], finals[i + 1]), 0.0});
  }
  finish_study(study, false);
  return study;
}

void write_study_csv(std::ostream& os, const StudyResult& study) {
  os << "level,n_axial,h,dt,error,order\n";
  for (std::size_t i = 0; i < study.levels.size(); ++i) {
    const auto& l = study.levels[i];
    os << i << ',' << l.n_axial << ',' << format_double(l.h) << ',' << format_double(l.dt) << ','
       << format_double(l.error) << ',' << format_double(l.order) << '\n';
  }
}

Trajectory dense_reference(const Mesh& mesh, const ScenarioConfig& config, double rtol,
                           const VectorXd* fixed_reaction) {
  namespace odeint = boost::numeric::odeint;
  constexpr std::size_t kMaxCells = 64;
  if (mesh.num_cells() > kMaxCells) {
    throw ConfigError("mesh", "dense reference is limited to 64 cells");
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  const auto& model = config.transport;
  const auto& mu = config.kinetics;
  using Vector = std::vector<double>;

  auto rhs = [&](const Vector& u, Vector& dudt, double t) {
    const TransportOperator ls = assemble_species(mesh, model, Species::Substrate, t);
    const TransportOperator lb = assemble_species(mesh, model, Species::Biomass, t);
    const Eigen::Map<const VectorXd> s(u.data(), n);
    const Eigen::Map<const VectorXd> b(u.data() + n, n);
    VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      c[i] = fixed_reaction != nullptr ? (*fixed_reaction)[i] : mu.eval(s[i]);
    }
    const VectorXd growth = c.cwiseProduct(b);
    Eigen::Map<VectorXd> ds(dudt.data(), n);
    Eigen::Map<VectorXd> db(dudt.data() + n, n);
    ds = ls.matrix * s + ls.source - growth;
    db = lb.matrix * b + growth;
  };

  const State start = initial_state(mesh, config);
  Vector u(static_cast<std::size_t>(2 * n));
  std::copy(start.S.begin(), start.S.end(), u.begin());
  std::copy(start.B.begin(), start.B.end(), u.begin() + n);

  Trajectory traj;
  traj.dt = config.solver.dt;
  const int steps = config.num_steps();
  std::vector<double> times;
  for (int k = 0; k <= steps; ++k) {
    times.push_back(k * traj.dt);
  }
  auto observer = [&](const Vector& x, double t) {
    State s{t, Eigen::Map<const VectorXd>(x.data(), n), Eigen::Map<const VectorXd>(x.data() + n, n)};
    traj.states.push_back(std::move(s));
  };
  if (steps == 0) {
    observer(u, 0.0);
    return traj;
  }
  auto stepper = odeint::make_controlled(rtol * 1e-2, rtol, odeint::runge_kutta_dopri5<Vector>());
  odeint::integrate_times(stepper, rhs, u, times.begin(), times.end(), traj.dt / 16.0, observer);
  for (auto& s : traj.states) {
    if (!s.S.allFinite() || !s.B.allFinite()) {
      throw SolverError("dense reference became non-finite", {});
    }
  }
  traj.steps.resize(static_cast<std::size_t>(steps));
  return traj;
}

State steady_state_constant(const Mesh& mesh, const ScenarioConfig& config) {
  const auto& model = config.transport;
  if (!std::holds_alternative<FlowField::Constant>(model.flow.profile())) {
    throw ConfigError("flow.profile", "steady state requires a constant flow speed");
  }
  const auto& samples = model.inlet.samples();
  const double se = samples.front().second;
  for (const auto& [t, v] : samples) {
    if (v != se) {
      throw ConfigError("inlet.schedule", "steady state requires a constant inlet concentration");
    }
  }
  if (config.kinetics.kind() != KineticsKind::Zero) {
    throw ConfigError("kinetics.kind", "steady state requires the zero growth model");
  }
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  return State{config.final_time, VectorXd::Constant(n, se), VectorXd::Zero(n)};
}

double steady_state_residual(const Mesh& mesh, const ScenarioConfig& config) {
  const State s = steady_state_constant(mesh, config);
  const TransportOperator op = assemble_species(mesh, config.transport, Species::Substrate, config.final_time);
  const VectorXd r = op.matrix * s.S + op.source;
  return r.cwiseAbs().maxCoeff();
}

}  // namespace bioreactor
