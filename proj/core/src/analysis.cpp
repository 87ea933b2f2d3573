#include "bioreactor/analysis.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "bioreactor/error.hpp"
#include "bioreactor/format.hpp"

namespace bioreactor {

namespace {

constexpr double kNonnegativeTolerance = 1e-12;
constexpr double kBoundSlack = 1e-8;
constexpr double kMassTolerance = 1e-9;
constexpr double kEnergySlack = 1e-6;
constexpr double kWitnessSlack = 1e-12;

double sup_abs(const VectorXd& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

double weighted_sq(const VectorXd& volumes, const VectorXd& u) { return volumes.dot(u.cwiseAbs2()); }

double inlet_sup(const ScenarioConfig& config) { return config.transport.inlet.sup(config.final_time); }

}  // namespace

NonnegativityCheck check_nonnegativity(const Trajectory& traj, double inlet_sup_value) {
  NonnegativityCheck out;
  if (traj.states.empty()) {
    return out;
  }
  out.min_S = std::numeric_limits<double>::infinity();
  out.min_B = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.states) {
    out.min_S = std::min(out.min_S, s.S.minCoeff());
    out.min_B = std::min(out.min_B, s.B.minCoeff());
  }
  out.scale = std::max({sup_abs(traj.initial().S), sup_abs(traj.initial().B), inlet_sup_value, 1.0});
  out.tolerance = kNonnegativeTolerance * out.scale;
  out.pass = out.min_S >= -out.tolerance && out.min_B >= -out.tolerance;
  return out;
}

NonnegativityCheck check_nonnegativity(const Trajectory& traj, const ScenarioConfig& config) {
  return check_nonnegativity(traj, inlet_sup(config));
}

BoundsCheck check_linf_bounds(const Trajectory& traj, const GrowthRateModel& model, const ScenarioConfig& config) {
  BoundsCheck out;
  if (traj.states.empty()) {
    return out;
  }
  const State& first = traj.initial();
  const double b0 = sup_abs(first.B);
  const double mu = model.sup_norm();
  const double s_bound = std::max(sup_abs(first.S), inlet_sup(config)) * (1.0 + kBoundSlack);
  const bool nonnegative_data =
      first.S.minCoeff() >= 0.0 && first.B.minCoeff() >= 0.0 && config.transport.inlet.min(config.final_time) >= 0.0;
  out.biomass_applicable = first.B.minCoeff() >= 0.0;
  out.substrate_applicable = nonnegative_data && config.transport.flow.axially_uniform();

  out.min_margin_B = out.min_margin_B_implicit = out.min_margin_S = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const State& s = traj.states[n];
    const double max_b = s.B.maxCoeff();
    const double max_s = s.S.maxCoeff();
    const double growth = std::exp(mu * s.t);
    const double implicit_growth = std::pow(1.0 - traj.dt * mu, -static_cast<double>(n));
    out.margin_B.push_back(b0 * growth * (1.0 + kBoundSlack) - max_b);
    out.margin_B_implicit.push_back(b0 * implicit_growth * (1.0 + kBoundSlack) - max_b);
    out.margin_S.push_back(s_bound - max_s);
    out.min_margin_B = std::min(out.min_margin_B, out.margin_B.back());
    out.min_margin_B_implicit = std::min(out.min_margin_B_implicit, out.margin_B_implicit.back());
    out.min_margin_S = std::min(out.min_margin_S, out.margin_S.back());
  }
  out.pass = (!out.biomass_applicable || out.min_margin_B >= 0.0) &&
             (!out.substrate_applicable || out.min_margin_S >= 0.0);
  return out;
}

MassLedger mass_balance(const Trajectory& traj, const Mesh& mesh, const ScenarioConfig& config) {
  MassLedger out;
  const VectorXd volumes = cell_volumes(mesh);
  const auto& model = config.transport;
  double influx = 0.0;
  double outflow = 0.0;
  double largest = 0.0;
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const State& s = traj.states[n];
    if (n > 0) {
      influx += traj.dt * inlet_influx(mesh, model.flow, model.inlet(s.t), s.t);
      outflow += traj.dt * outlet_outflow(mesh, model.flow, s.S + s.B, s.t);
    }
    const double total = volumes.dot(s.S + s.B);
    out.total.push_back(total);
    out.influx.push_back(influx);
    out.outflow.push_back(outflow);
    out.residual.push_back(total - out.total.front() - influx + outflow);
    largest = std::max({largest, std::abs(total), std::abs(influx), std::abs(outflow)});
  }
  for (double r : out.residual) {
    out.max_relative_residual = std::max(out.max_relative_residual, largest > 0.0 ? std::abs(r) / largest : 0.0);
  }
  out.pass = out.max_relative_residual <= kMassTolerance;
  return out;
}

double coercivity_margin(const ScenarioConfig& config, double trace_constant) {
  const double d = std::min(config.transport.diffusion_substrate, config.transport.diffusion_biomass);
  return d / (trace_constant * trace_constant) - config.transport.flow.sup_negative_part();
}

double estimate_trace_constant(const Mesh& mesh) {
  using ColMatrix = Eigen::SparseMatrix<double>;
  const VectorXd volumes = cell_volumes(mesh);
  ColMatrix h1 = stiffness_form(mesh);
  for (Eigen::Index i = 0; i < volumes.size(); ++i) {
    h1.coeffRef(i, i) += volumes[i];
  }
  const ColMatrix boundary = boundary_mass_form(mesh);
  Eigen::SimplicialLDLT<ColMatrix> factor(h1);
  if (factor.info() != Eigen::Success) {
    throw SolverError("trace constant: H1 form is not positive definite", {});
  }
  VectorXd x = VectorXd::Ones(volumes.size());
  double theta = 0.0;
  std::vector<double> history;
  constexpr int kMaxIterations = 100000;
  for (int k = 0; k < kMaxIterations; ++k) {
    VectorXd y = factor.solve(boundary * x);
    const double h = std::sqrt(y.dot(h1 * y));
    y /= h;
    const double next = y.dot(boundary * y);
    history.push_back(next);
    x = std::move(y);
    if (k > 0 && std::abs(next - theta) <= 1e-8 * next) {
      return std::sqrt(next);
    }
    theta = next;
  }
  throw SolverError("trace constant: power iteration did not converge", history);
}

BilinearConstants bilinear_constants_report(const ScenarioConfig& config, double trace_constant) {
  BilinearConstants out;
  out.sup_Q = config.transport.flow.sup();
  out.trace_constant = trace_constant;
  const double q = out.sup_Q;
  auto species = [&](double d) {
    SpeciesConstants s;
    s.diffusion = d;
    s.k = d + (1.0 + trace_constant * trace_constant) * q;
    s.epsilon = q > 0.0 ? q / (2.0 * d) : 1.0;
    s.alpha1 = d - q / (4.0 * s.epsilon);
    s.delta = std::max(1.0, q) * 1e-3;
    s.lambda = s.epsilon * q + s.delta;
    s.alpha2 = s.delta;
    s.alpha = std::min(s.alpha1, s.alpha2);
    return s;
  };
  out.substrate = species(config.transport.diffusion_substrate);
  out.biomass = species(config.transport.diffusion_biomass);
  return out;
}

BilinearWitness bilinear_witness(const Mesh& mesh, const ScenarioConfig& config, const BilinearConstants& constants,
                                 int pairs, std::uint64_t seed) {
  BilinearWitness out;
  out.max_continuity_ratio = 0.0;
  out.min_coercivity_ratio = std::numeric_limits<double>::infinity();
  const auto n = static_cast<Eigen::Index>(mesh.num_cells());
  const VectorXd volumes = cell_volumes(mesh);
  const SparseMatrix stiffness = stiffness_form(mesh);
  const double times[] = {0.0, 0.5 * config.final_time, config.final_time};

  struct Form {
    SparseMatrix a;
    const SpeciesConstants* constants;
  };
  std::vector<Form> forms;
  for (double t : times) {
    forms.push_back({bilinear_form(mesh, assemble_species(mesh, config.transport, Species::Substrate, t)),
                     &constants.substrate});
    forms.push_back(
        {bilinear_form(mesh, assemble_species(mesh, config.transport, Species::Biomass, t)), &constants.biomass});
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_field = [&](bool smooth) {
    VectorXd u(n);
    double walk = normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) {
      walk += smooth ? 0.1 * normal(rng) : 0.0;
      u[i] = smooth ? walk : normal(rng);
    }
    return u;
  };
  auto h1_norm = [&](const VectorXd& u) { return std::sqrt(weighted_sq(volumes, u) + u.dot(stiffness * u)); };

  for (int sample = 0; sample < pairs; ++sample) {
    const bool smooth = sample % 2 == 1;
    const VectorXd p = random_field(smooth);
    const VectorXd v = random_field(smooth);
    const double np = h1_norm(p);
    const double nv = h1_norm(v);
    for (const auto& form : forms) {
      const SpeciesConstants& c = *form.constants;
      const double continuity = std::abs(v.dot(form.a * p)) / (c.k * np * nv);
      const double coercivity = (p.dot(form.a * p) + c.lambda * weighted_sq(volumes, p)) / (c.alpha * np * np);
      out.max_continuity_ratio = std::max(out.max_continuity_ratio, continuity);
      out.min_coercivity_ratio = std::min(out.min_coercivity_ratio, coercivity);
      out.continuity_violations += continuity > 1.0 + kWitnessSlack ? 1 : 0;
      out.coercivity_violations += coercivity < 1.0 - kWitnessSlack ? 1 : 0;
    }
    ++out.samples;
  }
  return out;
}

EnergyReport energy_estimate_report(const Trajectory& traj, const Mesh& mesh, const ScenarioConfig& config,
                                    const BilinearConstants& constants) {
  EnergyReport out;
  const VectorXd volumes = cell_volumes(mesh);
  const SparseMatrix stiffness = stiffness_form(mesh);
  const double dt = traj.dt;
  const double d_s = config.transport.diffusion_substrate;
  const double d_b = config.transport.diffusion_biomass;
  const double q = config.transport.flow.sup();
  const double ct2 = constants.trace_constant * constants.trace_constant;
  double c_sup = 0.0;
  for (const auto& c : traj.reaction) {
    c_sup = std::max(c_sup, sup_abs(c));
  }
  const double gamma = boundary_measure(mesh, BoundaryTag::Inlet);
  const double root_gamma = std::sqrt(gamma);

  out.sup_Q = q;
  out.sup_c = c_sup;
  out.inlet_measure = gamma;
  out.trace_constant = constants.trace_constant;
  out.epsilon2 = q > 0.0 ? q / d_s : 1.0;
  out.epsilon1 = q > 0.0 ? q * root_gamma * ct2 / d_s : 1.0;
  out.epsilon3 = q > 0.0 ? q / (2.0 * d_b) : 1.0;

  const double trace_term = root_gamma * ct2 / (4.0 * out.epsilon1);
  const double grad_s = d_s - q * (1.0 / (4.0 * out.epsilon2) + trace_term);
  const double grad_b = d_b - q / (4.0 * out.epsilon3);
  const double l2_s = q * (out.epsilon2 + trace_term) + c_sup / 2.0;
  const double l2_b = out.epsilon3 * q + c_sup;

  auto kappa_of = [dt](double lambda) { return -std::expm1(-2.0 * lambda * dt) / 2.0; };
  out.lambda = q * std::max(out.epsilon3, out.epsilon2 + trace_term) + c_sup + constants.substrate.delta;
  const double l2_max = std::max(l2_s, l2_b);
  if (traj.num_steps() > 0) {
    if (1.0 / (2.0 * dt) <= l2_max) {
      out.final_applicable = false;
    } else {
      for (int k = 0; k < 2000 && kappa_of(out.lambda) / dt <= l2_max; ++k) {
        out.lambda *= 2.0;
      }
      out.final_applicable = kappa_of(out.lambda) / dt > l2_max;
    }
  }
  out.kappa = kappa_of(out.lambda);

  const std::size_t steps = traj.num_steps();
  double m_s = 0.0, g_s = 0.0, m_b = 0.0, g_b = 0.0, lam_s = 0.0, lam_b = 0.0, se2 = 0.0;
  double last_s = 0.0, last_b = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) {
    const State& s = traj.states[n];
    const double w2 = std::exp(-2.0 * out.lambda * s.t);
    const double ms = w2 * weighted_sq(volumes, s.S);
    const double mb = w2 * weighted_sq(volumes, s.B);
    if (n < steps) {
      lam_s += out.kappa * ms;
      lam_b += out.kappa * mb;
    }
    if (n > 0) {
      m_s += dt * ms;
      m_b += dt * mb;
      g_s += dt * w2 * s.S.dot(stiffness * s.S);
      g_b += dt * w2 * s.B.dot(stiffness * s.B);
      const double se = config.transport.inlet(s.t);
      se2 += dt * se * se;
    }
    if (n == steps) {
      last_s = ms;
      last_b = mb;
    }
  }
  const double s0 = weighted_sq(volumes, traj.initial().S);
  const double b0 = weighted_sq(volumes, traj.initial().B);
  const double inlet_term = out.epsilon1 * q * se2 * root_gamma;

  auto judge = [](double lhs, double rhs) { return EnergyInequality{lhs, rhs, lhs <= rhs * (1.0 + kEnergySlack)}; };
  out.substrate = judge(0.5 * last_s + grad_s * g_s + lam_s - l2_s * m_s, 0.5 * s0 + inlet_term + c_sup * m_b / 2.0);
  out.biomass = judge(0.5 * last_b + grad_b * g_b + lam_b - l2_b * m_b, 0.5 * b0);

  if (out.final_applicable && steps > 0) {
    const double beta_b = std::min(out.kappa / dt - l2_b, grad_b);
    const double beta_s = std::min(out.kappa / dt - l2_s, grad_s);
    out.alpha1 = 1.0 / (2.0 * beta_b);
    out.alpha2 = 1.0 / beta_s;
    out.final_biomass = judge(m_b + g_b, out.alpha1 * b0);
    out.final_substrate =
        judge(m_s + g_s, out.alpha2 * (0.5 * s0 + inlet_term) + out.alpha1 * out.alpha2 * c_sup / 2.0 * b0);
  }
  out.pass = out.substrate.pass && out.biomass.pass && out.final_biomass.pass && out.final_substrate.pass;
  return out;
}

double trajectory_distance(const Mesh& mesh, const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size()) {
    throw Error("trajectory distance: time grids differ");
  }
  const VectorXd volumes = cell_volumes(mesh);
  double sum = 0.0;
  for (std::size_t n = 1; n < a.states.size(); ++n) {
    sum += weighted_sq(volumes, a.states[n].S - b.states[n].S) + weighted_sq(volumes, a.states[n].B - b.states[n].B);
  }
  return std::sqrt(a.dt * sum);
}

UniquenessGap uniqueness_gap(const Mesh& mesh, const ScenarioConfig& config, const Trajectory& guess_a,
                             const Trajectory& guess_b) {
  const GlobalSolve a = solve_schauder_global(mesh, config, guess_a, config.solver);
  const GlobalSolve b = solve_schauder_global(mesh, config, guess_b, config.solver);
  UniquenessGap out;
  out.iterations_a = a.outer_iterations;
  out.iterations_b = b.outer_iterations;
  out.absolute = trajectory_distance(mesh, a.trajectory, b.trajectory);
  Trajectory zero = a.trajectory;
  for (auto& s : zero.states) {
    s.S.setZero();
    s.B.setZero();
  }
  const double norm = trajectory_distance(mesh, a.trajectory, zero);
  out.relative = norm > 0.0 ? out.absolute / norm : out.absolute;
  return out;
}

UniquenessGap uniqueness_gap(const Mesh& mesh, const ScenarioConfig& config) {
  return uniqueness_gap(mesh, config, constant_guess(mesh, config, 0.0),
                        constant_guess(mesh, config, inlet_sup(config)));
}

std::vector<std::string> DiagnosticsReport::failures() const {
  std::vector<std::string> out;
  if (!checks_enabled) {
    return out;
  }
  if (!nonnegativity.pass) {
    out.push_back("nonnegativity of S and B: min S = " + format_double(nonnegativity.min_S) +
                  ", min B = " + format_double(nonnegativity.min_B));
  }
  if (bounds.biomass_applicable && bounds.min_margin_B < 0.0) {
    out.push_back("biomass exponential bound: min margin " + format_double(bounds.min_margin_B));
  }
  if (bounds.substrate_applicable && bounds.min_margin_S < 0.0) {
    out.push_back("substrate maximum bound: min margin " + format_double(bounds.min_margin_S));
  }
  if (!mass.pass) {
    out.push_back("mass balance: relative residual " + format_double(mass.max_relative_residual));
  }
  if (!(coercivity_margin > 0.0)) {
    out.push_back("coercivity condition on the negative part of Q: margin " + format_double(coercivity_margin));
  }
  if (!energy.substrate.pass) {
    out.push_back("substrate energy estimate: lhs " + format_double(energy.substrate.lhs) + " > rhs " +
                  format_double(energy.substrate.rhs));
  }
  if (!energy.biomass.pass) {
    out.push_back("biomass energy estimate: lhs " + format_double(energy.biomass.lhs) + " > rhs " +
                  format_double(energy.biomass.rhs));
  }
  if (!energy.final_biomass.pass || !energy.final_substrate.pass) {
    out.push_back("H1 energy bounds");
  }
  return out;
}

DiagnosticsReport diagnose(const Mesh& mesh, const Trajectory& traj, const ScenarioConfig& config) {
  DiagnosticsReport report;
  report.checks_enabled = config.invariant_checks;
  report.nonnegativity = check_nonnegativity(traj, config);
  report.bounds = check_linf_bounds(traj, config.kinetics, config);
  report.mass = mass_balance(traj, mesh, config);
  report.trace_constant = estimate_trace_constant(mesh);
  report.coercivity_margin = bioreactor::coercivity_margin(config, report.trace_constant);
  report.constants = bilinear_constants_report(config, report.trace_constant);
  report.energy = energy_estimate_report(traj, mesh, config, report.constants);

  const VectorXd volumes = cell_volumes(mesh);
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const State& s = traj.states[n];
    LevelDiagnostics row;
    row.t = s.t;
    row.min_S = s.S.minCoeff();
    row.max_S = s.S.maxCoeff();
    row.min_B = s.B.minCoeff();
    row.max_B = s.B.maxCoeff();
    row.moles_S = volumes.dot(s.S);
    row.moles_B = volumes.dot(s.B);
    row.influx = report.mass.influx[n];
    row.outflow = report.mass.outflow[n];
    row.residual = report.mass.residual[n];
    row.margin_B = report.bounds.margin_B[n];
    row.margin_S = report.bounds.margin_S[n];
    if (n > 0) {
      row.picard_iterations = traj.steps[n - 1].picard_iterations;
      row.linear_iterations = traj.steps[n - 1].linear_iterations;
    }
    report.levels.push_back(row);
  }
  return report;
}

void write_diagnostics_csv(std::ostream& os, const DiagnosticsReport& report) {
  os << "step,t,min_S,max_S,min_B,max_B,moles_S,moles_B,cumulative_influx,cumulative_outflow,mass_residual,"
        "margin_B,margin_S,picard_iterations,linear_iterations\n";
  for (std::size_t n = 0; n < report.levels.size(); ++n) {
    const auto& r = report.levels[n];
    os << n;
    for (double v : {r.t, r.min_S, r.max_S, r.min_B, r.max_B, r.moles_S, r.moles_B, r.influx, r.outflow, r.residual,
                     r.margin_B, r.margin_S}) {
      os << ',' << format_double(v);
    }
    os << ',' << r.picard_iterations << ',' << r.linear_iterations << '\n';
  }
}

void write_summary(std::ostream& os, const DiagnosticsReport& report, const ScenarioConfig& config) {
  auto line = [&os](const std::string& key, double value) { os << key << ": " << format_double(value) << '\n'; };
  auto flag = [&os](const std::string& key, bool value) { os << key << ": " << (value ? "pass" : "FAIL") << '\n'; };
  os << "mesh: " << to_string(config.mesh.mode) << ' ' << config.mesh.n_axial << 'x'
     << (config.mesh.mode == MeshMode::Axial1D ? 1 : config.mesh.n_radial) << '\n';
  os << "kinetics: " << to_string(config.kinetics.kind()) << '\n';
  os << "scheme: " << to_string(config.transport.scheme) << '\n';
  os << "nonlinear_mode: " << to_string(config.solver.nonlinear_mode) << '\n';
  line("final_time", config.final_time);
  line("dt", config.solver.dt);
  os << "steps: " << (report.levels.empty() ? 0 : report.levels.size() - 1) << '\n';
  os << "checks: " << (report.checks_enabled ? "on" : "off") << '\n';
  line("min_S", report.nonnegativity.min_S);
  line("min_B", report.nonnegativity.min_B);
  flag("nonnegativity", report.nonnegativity.pass);
  line("min_margin_B", report.bounds.min_margin_B);
  line("min_margin_B_implicit", report.bounds.min_margin_B_implicit);
  line("min_margin_S", report.bounds.min_margin_S);
  os << "substrate_bound_applicable: " << (report.bounds.substrate_applicable ? "yes" : "no") << '\n';
  flag("linf_bounds", report.bounds.pass);
  line("mass_relative_residual", report.mass.max_relative_residual);
  flag("mass_balance", report.mass.pass);
  line("trace_constant", report.trace_constant);
  line("coercivity_margin", report.coercivity_margin);
  const auto& c = report.constants;
  line("sup_Q", c.sup_Q);
  for (const auto& [name, s] : {std::pair{"substrate", &c.substrate}, std::pair{"biomass", &c.biomass}}) {
    const std::string prefix = name;
    line(prefix + "_k", s->k);
    line(prefix + "_epsilon", s->epsilon);
    line(prefix + "_alpha", s->alpha);
    line(prefix + "_lambda", s->lambda);
  }
  const auto& e = report.energy;
  line("energy_lambda", e.lambda);
  line("energy_epsilon1", e.epsilon1);
  line("energy_epsilon2", e.epsilon2);
  line("energy_epsilon3", e.epsilon3);
  line("energy_substrate_lhs", e.substrate.lhs);
  line("energy_substrate_rhs", e.substrate.rhs);
  line("energy_biomass_lhs", e.biomass.lhs);
  line("energy_biomass_rhs", e.biomass.rhs);
  os << "energy_final_applicable: " << (e.final_applicable ? "yes" : "no") << '\n';
  if (e.final_applicable) {
    line("energy_alpha1", e.alpha1);
    line("energy_alpha2", e.alpha2);
  }
  flag("energy_estimates", e.pass);
  const auto failures = report.failures();
  os << "status: " << (failures.empty() ? "pass" : "FAIL") << '\n';
  for (const auto& f : failures) {
    os << "failed: " << f << '\n';
  }
}

SimulationResult simulate(const ScenarioConfig& config) {
  validate(config);
  Mesh mesh = build_mesh(config.mesh);
  Trajectory traj = integrate(mesh, config);
  DiagnosticsReport report = diagnose(mesh, traj, config);
  return SimulationResult{std::move(mesh), std::move(traj), std::move(report)};
}

}  // namespace bioreactor
