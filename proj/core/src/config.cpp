#include "bioreactor/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "bioreactor/error.hpp"

namespace bioreactor {

namespace {

class Reader {
 public:
  Reader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(path_.empty() ? "<document>" : path_, "expected a mapping");
    }
  }

  Reader section(const std::string& key) {
    used_.insert(key);
    return Reader(node_ ? node_[key] : YAML::Node(), join(key));
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull(); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!has(key)) {
      return fallback;
    }
    try {
      return node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(join(key), "has the wrong type");
    }
  }

  YAML::Node raw(const std::string& key) {
    used_.insert(key);
    return has(key) ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  }

  std::string field(const std::string& key) const { return join(key); }

  void reject_unknown() const {
    if (!node_ || !node_.IsMap()) {
      return;
    }
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.contains(key)) {
        throw ConfigError(join(key), "unknown key");
      }
    }
  }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

template <class E>
E parse_enum(const std::string& field, const std::string& value,
             std::initializer_list<std::pair<const char*, E>> options) {
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (value == name) {
      return e;
    }
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(field, "must be one of {" + allowed + "}, got '" + value + "'");
}

InitialField read_initial(Reader& r, const std::string& key, double fallback) {
  const YAML::Node node = r.raw(key);
  if (!node) {
    return InitialField{fallback};
  }
  try {
    if (node.IsSequence()) {
      return InitialField{node.as<std::vector<double>>()};
    }
    return InitialField{node.as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(r.field(key), "must be a number or a list of numbers");
  }
}

FlowField read_flow(Reader r) {
  const auto profile = r.get<std::string>("profile", "constant");
  const double q0 = r.get<double>("q0", 0.1);
  const double q1 = r.get<double>("q1", q0);
  const double ramp_time = r.get<double>("ramp_time", 1.0);
  FlowField::AxiallyVarying table;
  table.z = r.get<std::vector<double>>("z", {});
  table.t = r.get<std::vector<double>>("t", {});
  table.q = r.get<std::vector<std::vector<double>>>("q", {});
  r.reject_unknown();
  if (profile == "constant") {
    return FlowField::constant(q0);
  }
  if (profile == "ramp") {
    return FlowField::ramp(q0, q1, ramp_time);
  }
  if (profile == "table") {
    return FlowField(std::move(table));
  }
  throw ConfigError("flow.profile", "must be one of {constant, ramp, table}, got '" + profile + "'");
}

GrowthRateModel read_kinetics(Reader r) {
  const auto kind = r.get<std::string>("kind", "monod");
  const double mu_max = r.get<double>("mu_max", 1.0);
  const double ks = r.get<double>("half_saturation", 0.5);
  const double ki = r.get<double>("inhibition", 1.0);
  const double slope = r.get<double>("slope", 1.0);
  const double cap = r.get<double>("cap", 1.0);
  r.reject_unknown();
  const auto k = parse_enum<KineticsKind>("kinetics.kind", kind,
                                          {{"monod", KineticsKind::Monod},
                                           {"haldane", KineticsKind::Haldane},
                                           {"capped_linear", KineticsKind::CappedLinear},
                                           {"zero", KineticsKind::Zero}});
  switch (k) {
    case KineticsKind::Monod: return GrowthRateModel::monod(mu_max, ks);
    case KineticsKind::Haldane: return GrowthRateModel::haldane(mu_max, ks, ki);
    case KineticsKind::CappedLinear: return GrowthRateModel::capped_linear(slope, cap);
    case KineticsKind::Zero: return GrowthRateModel::zero();
  }
  return GrowthRateModel::zero();
}

ScenarioConfig from_node(const YAML::Node& root) {
  ScenarioConfig cfg;
  const ScenarioConfig defaults;
  Reader top(root, "");

  {
    Reader m = top.section("mesh");
    const auto mode = m.get<std::string>("mode", std::string(to_string(defaults.mesh.mode)));
    cfg.mesh.mode = parse_enum<MeshMode>("mesh.mode", mode,
                                         {{"axial1d", MeshMode::Axial1D}, {"axisymmetric2d", MeshMode::Axisymmetric2D}});
    cfg.mesh.length = m.get<double>("length", defaults.mesh.length);
    cfg.mesh.radius = m.get<double>("radius", defaults.mesh.radius);
    cfg.mesh.n_axial = m.get<int>("n_axial", defaults.mesh.n_axial);
    cfg.mesh.n_radial = m.get<int>("n_radial", defaults.mesh.n_radial);
    m.reject_unknown();
  }
  {
    Reader t = top.section("transport");
    cfg.transport.diffusion_substrate = t.get<double>("diffusion_substrate", defaults.transport.diffusion_substrate);
    cfg.transport.diffusion_biomass = t.get<double>("diffusion_biomass", defaults.transport.diffusion_biomass);
    const auto scheme = t.get<std::string>("scheme", "upwind");
    cfg.transport.scheme = parse_enum<AdvectionScheme>(
        "transport.scheme", scheme, {{"upwind", AdvectionScheme::Upwind}, {"central", AdvectionScheme::Central}});
    cfg.transport.strict = t.get<bool>("strict", defaults.transport.strict);
    t.reject_unknown();
  }
  cfg.transport.flow = read_flow(top.section("flow"));
  {
    Reader in = top.section("inlet");
    const YAML::Node schedule = in.raw("schedule");
    if (schedule) {
      std::vector<std::pair<double, double>> samples;
      try {
        for (const auto& row : schedule) {
          const auto pair = row.as<std::vector<double>>();
          if (pair.size() != 2) {
            throw ConfigError("inlet.schedule", "each sample must be [t, S_e]");
          }
          samples.emplace_back(pair[0], pair[1]);
        }
      } catch (const YAML::Exception&) {
        throw ConfigError("inlet.schedule", "must be a list of [t, S_e] pairs");
      }
      cfg.transport.inlet = InletSchedule(std::move(samples));
    } else if (in.has("concentration")) {
      cfg.transport.inlet = InletSchedule::constant(in.get<double>("concentration", 1.0));
    }
    in.reject_unknown();
  }
  {
    Reader init = top.section("initial");
    cfg.initial_substrate = read_initial(init, "substrate", std::get<double>(defaults.initial_substrate.value));
    cfg.initial_biomass = read_initial(init, "biomass", std::get<double>(defaults.initial_biomass.value));
    init.reject_unknown();
  }
  cfg.kinetics = read_kinetics(top.section("kinetics"));
  {
    Reader t = top.section("time");
    cfg.final_time = t.get<double>("final", defaults.final_time);
    t.reject_unknown();
  }
  {
    Reader s = top.section("solver");
    cfg.solver.dt = s.get<double>("dt", defaults.solver.dt);
    cfg.solver.linear_tol = s.get<double>("linear_tol", defaults.solver.linear_tol);
    cfg.solver.linear_max_iter = s.get<int>("linear_max_iter", defaults.solver.linear_max_iter);
    cfg.solver.picard_tol = s.get<double>("picard_tol", defaults.solver.picard_tol);
    cfg.solver.picard_max_iter = s.get<int>("picard_max_iter", defaults.solver.picard_max_iter);
    cfg.solver.picard_damping = s.get<double>("picard_damping", defaults.solver.picard_damping);
    const auto mode = s.get<std::string>("nonlinear_mode", "per_step_picard");
    cfg.solver.nonlinear_mode =
        parse_enum<NonlinearMode>("solver.nonlinear_mode", mode,
                                  {{"per_step_picard", NonlinearMode::PerStepPicard},
                                   {"schauder_global", NonlinearMode::SchauderGlobal}});
    s.reject_unknown();
  }
  cfg.invariant_checks = top.get<bool>("checks", defaults.invariant_checks);
  {
    Reader o = top.section("output");
    cfg.output.snapshots = o.get<int>("snapshots", defaults.output.snapshots);
    cfg.output.verbose = o.get<bool>("verbose", defaults.output.verbose);
    o.reject_unknown();
  }
  top.reject_unknown();
  validate(cfg);
  return cfg;
}

YAML::Node load_document(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line, e.mark.column);
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) { return from_node(load_document(text)); }

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;

  out << YAML::Key << "mesh" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(cfg.mesh.mode));
  out << YAML::Key << "length" << YAML::Value << cfg.mesh.length;
  out << YAML::Key << "radius" << YAML::Value << cfg.mesh.radius;
  out << YAML::Key << "n_axial" << YAML::Value << cfg.mesh.n_axial;
  out << YAML::Key << "n_radial" << YAML::Value << cfg.mesh.n_radial;
  out << YAML::EndMap;

  out << YAML::Key << "transport" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "diffusion_substrate" << YAML::Value << cfg.transport.diffusion_substrate;
  out << YAML::Key << "diffusion_biomass" << YAML::Value << cfg.transport.diffusion_biomass;
  out << YAML::Key << "scheme" << YAML::Value << std::string(to_string(cfg.transport.scheme));
  out << YAML::Key << "strict" << YAML::Value << cfg.transport.strict;
  out << YAML::EndMap;

  out << YAML::Key << "flow" << YAML::Value << YAML::BeginMap;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FlowField::Constant>) {
          out << YAML::Key << "profile" << YAML::Value << "constant";
          out << YAML::Key << "q0" << YAML::Value << p.q0;
        } else if constexpr (std::is_same_v<T, FlowField::TimeRamp>) {
          out << YAML::Key << "profile" << YAML::Value << "ramp";
          out << YAML::Key << "q0" << YAML::Value << p.q0;
          out << YAML::Key << "q1" << YAML::Value << p.q1;
          out << YAML::Key << "ramp_time" << YAML::Value << p.ramp_time;
        } else {
          out << YAML::Key << "profile" << YAML::Value << "table";
          out << YAML::Key << "z" << YAML::Value << YAML::Flow << p.z;
          out << YAML::Key << "t" << YAML::Value << YAML::Flow << p.t;
          out << YAML::Key << "q" << YAML::Value << YAML::BeginSeq;
          for (const auto& row : p.q) {
            out << YAML::Flow << row;
          }
          out << YAML::EndSeq;
        }
      },
      cfg.transport.flow.profile());
  out << YAML::EndMap;

  out << YAML::Key << "inlet" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "schedule" << YAML::Value << YAML::BeginSeq;
  for (const auto& [t, v] : cfg.transport.inlet.samples()) {
    out << YAML::Flow << YAML::BeginSeq << t << v << YAML::EndSeq;
  }
  out << YAML::EndSeq << YAML::EndMap;

  auto emit_initial = [&](const char* key, const InitialField& f) {
    out << YAML::Key << key << YAML::Value;
    if (const auto* u = std::get_if<double>(&f.value)) {
      out << *u;
    } else {
      out << YAML::Flow << std::get<std::vector<double>>(f.value);
    }
  };
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  emit_initial("substrate", cfg.initial_substrate);
  emit_initial("biomass", cfg.initial_biomass);
  out << YAML::EndMap;

  const auto& k = cfg.kinetics;
  out << YAML::Key << "kinetics" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(k.kind()));
  switch (k.kind()) {
    case KineticsKind::Monod:
      out << YAML::Key << "mu_max" << YAML::Value << k.mu_max();
      out << YAML::Key << "half_saturation" << YAML::Value << k.half_saturation();
      break;
    case KineticsKind::Haldane:
      out << YAML::Key << "mu_max" << YAML::Value << k.mu_max();
      out << YAML::Key << "half_saturation" << YAML::Value << k.half_saturation();
      out << YAML::Key << "inhibition" << YAML::Value << k.inhibition();
      break;
    case KineticsKind::CappedLinear:
      out << YAML::Key << "slope" << YAML::Value << k.slope();
      out << YAML::Key << "cap" << YAML::Value << k.cap();
      break;
    case KineticsKind::Zero:
      break;
  }
  out << YAML::EndMap;

  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "final" << YAML::Value << cfg.final_time;
  out << YAML::EndMap;

  const auto& s = cfg.solver;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << s.dt;
  out << YAML::Key << "linear_tol" << YAML::Value << s.linear_tol;
  out << YAML::Key << "linear_max_iter" << YAML::Value << s.linear_max_iter;
  out << YAML::Key << "picard_tol" << YAML::Value << s.picard_tol;
  out << YAML::Key << "picard_max_iter" << YAML::Value << s.picard_max_iter;
  out << YAML::Key << "picard_damping" << YAML::Value << s.picard_damping;
  out << YAML::Key << "nonlinear_mode" << YAML::Value << std::string(to_string(s.nonlinear_mode));
  out << YAML::EndMap;

  out << YAML::Key << "checks" << YAML::Value << cfg.invariant_checks;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "snapshots" << YAML::Value << cfg.output.snapshots;
  out << YAML::Key << "verbose" << YAML::Value << cfg.output.verbose;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string apply_overrides(const std::string& text,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  YAML::Node root = load_document(text);
  if (!root || root.IsNull()) {
    root = YAML::Node(YAML::NodeType::Map);
  }
  for (const auto& [path, value] : overrides) {
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) {
      keys.push_back(part);
    }
    if (keys.empty()) {
      throw ConfigError(path, "empty override path");
    }
    // yaml-cpp nodes are handles; walk with copies that alias the tree.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      YAML::Node next = chain.back()[keys[i]];
      if (!next || next.IsNull()) {
        chain.back()[keys[i]] = YAML::Node(YAML::NodeType::Map);
        next = chain.back()[keys[i]];
      }
      chain.push_back(next);
    }
    chain.back()[keys.back()] = load_document(value);
  }
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << root;
  return std::string(out.c_str()) + "\n";
}

}  // namespace bioreactor
