#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "bioreactor/config.hpp"
#include "doctest.h"

using namespace bioreactor;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("bioreactor_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Invocation inv;
  inv.code = app::run_cli(args, out, err);
  inv.out = out.str();
  inv.err = err.str();
  return inv;
}

const std::string kSmall = R"(mesh: {mode: axial1d, length: 0.5, radius: 0.1, n_axial: 16}
transport: {diffusion_substrate: 0.01, diffusion_biomass: 0.01}
flow: {profile: constant, q0: 0.1}
inlet: {concentration: 1.0}
initial: {substrate: 0.0, biomass: 0.1}
kinetics: {kind: monod, mu_max: 1.0, half_saturation: 0.5}
time: {final: 1.0}
solver: {dt: 0.05}
output: {snapshots: 4}
)";

// Central fluxes at face Peclet 10 undershoot ahead of the feed front.
const std::string kUndershoot = R"(mesh: {mode: axial1d, length: 1.0, radius: 0.1, n_axial: 20}
transport: {diffusion_substrate: 0.005, diffusion_biomass: 0.005, scheme: central}
flow: {profile: constant, q0: 1.0}
inlet: {concentration: 1.0}
initial: {substrate: 0.0, biomass: 0.1}
kinetics: {kind: zero}
time: {final: 0.5}
solver: {dt: 0.01}
)";

}  // namespace

TEST_CASE("run writes its outputs") {
  TempDir tmp;
  write_text(tmp.path() / "ok.yaml", kSmall);
  const fs::path out = tmp.path() / "out";
  const auto inv = cli({"run", "--config", (tmp.path() / "ok.yaml").string(), "--out-dir", out.string()});
  CHECK(inv.code == 0);
  CHECK(inv.out.find("status: pass") != std::string::npos);
  for (const char* name : {"fields_0.csv", "fields_0.2.csv", "fields_0.8.csv", "fields_1.csv", "diagnostics.csv", "summary.txt",
                           "config.yaml", "trajectory.csv"}) {
    CHECK_MESSAGE(fs::exists(out / name), name);
  }
  const auto fields = read_lines(out / "fields_1.csv");
  REQUIRE(fields.size() == 17);
  CHECK(fields[0] == "cell,z,r,S,B");
  CHECK(read_lines(out / "diagnostics.csv").size() == 22);
  CHECK(read_text(out / "summary.txt").find("status: pass") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "residuals.csv"));

  SUBCASE("outputs are deterministic") {
    const fs::path again = tmp.path() / "again";
    CHECK(cli({"run", "--config", (tmp.path() / "ok.yaml").string(), "--out-dir", again.string()}).code == 0);
    for (const auto& entry : fs::directory_iterator(out)) {
      CHECK(read_text(entry.path()) == read_text(again / entry.path().filename()));
    }
  }

  SUBCASE("verbose adds the residual log") {
    const fs::path verbose = tmp.path() / "verbose";
    CHECK(cli({"run", "--config", (tmp.path() / "ok.yaml").string(), "--out-dir", verbose.string(), "--verbose"})
              .code == 0);
    CHECK(fs::exists(verbose / "residuals.csv"));
  }

  SUBCASE("check re-validates the written run") {
    const auto check = cli({"check", "--out-dir", out.string()});
    CHECK(check.code == 0);
    CHECK(check.out.find("status: pass") != std::string::npos);
  }
}

TEST_CASE("invariant violations exit with 2") {
  TempDir tmp;
  write_text(tmp.path() / "bad.yaml", kUndershoot);
  const auto inv =
      cli({"run", "--config", (tmp.path() / "bad.yaml").string(), "--out-dir", (tmp.path() / "o").string()});
  CHECK(inv.code == 2);
  CHECK(inv.err.find("nonnegativity") != std::string::npos);

  const auto off = cli({"run", "--config", (tmp.path() / "bad.yaml").string(), "--out-dir",
                        (tmp.path() / "o2").string(), "--checks", "off"});
  CHECK(off.code == 0);
}

TEST_CASE("configuration errors exit with 1") {
  TempDir tmp;
  CHECK(cli({"run", "--config", (tmp.path() / "missing.yaml").string()}).code == 1);
  CHECK(cli({"run"}).code == 1);
  write_text(tmp.path() / "typo.yaml", "mesh: {lenght: 1}\n");
  const auto typo = cli({"run", "--config", (tmp.path() / "typo.yaml").string()});
  CHECK(typo.code == 1);
  CHECK(typo.err.find("mesh.lenght") != std::string::npos);
  write_text(tmp.path() / "broken.yaml", "mesh: [1, 2\n");
  CHECK(cli({"run", "--config", (tmp.path() / "broken.yaml").string()}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"run", "--config", (tmp.path() / "typo.yaml").string(), "--checks", "maybe"}).code == 1);
}

TEST_CASE("solver failures exit with 3") {
  TempDir tmp;
  const std::string text = apply_overrides(kSmall, {{"solver.picard_max_iter", "1"}});
  write_text(tmp.path() / "slow.yaml", text);
  const auto inv = cli({"run", "--config", (tmp.path() / "slow.yaml").string(), "--out-dir", (tmp.path() / "o").string()});
  CHECK(inv.code == 3);
  CHECK(inv.err.find("step") != std::string::npos);
}

TEST_CASE("sweep aggregation") {
  TempDir tmp;
  write_text(tmp.path() / "base.yaml", kSmall);

  SUBCASE("empty sweep") {
    write_text(tmp.path() / "empty.yaml", "base: base.yaml\nruns: []\n");
    const fs::path out = tmp.path() / "out";
    CHECK(cli({"sweep", "--config", (tmp.path() / "empty.yaml").string(), "--out-dir", out.string()}).code == 0);
    CHECK(read_lines(out / "sweep_summary.csv").size() == 1);
  }

  SUBCASE("one failing run among three") {
    write_text(tmp.path() / "mixed.yaml", R"(base: base.yaml
runs:
  - {name: a, set: {flow.q0: 0.05}}
  - {name: b, set: {transport.scheme: central, transport.diffusion_substrate: 0.0005, flow.q0: 1.0, mesh.n_axial: 10, kinetics.kind: zero}}
  - {name: c, set: {flow.q0: 0.2}}
)");
    const fs::path out = tmp.path() / "out";
    const auto inv =
        cli({"sweep", "--config", (tmp.path() / "mixed.yaml").string(), "--out-dir", out.string(), "--threads", "2"});
    CHECK(inv.code == 2);
    const auto rows = read_lines(out / "sweep_summary.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[1].rfind("a,ok,", 0) == 0);
    CHECK(rows[2].rfind("b,invariant_failure,", 0) == 0);
    CHECK(rows[3].rfind("c,ok,", 0) == 0);
    CHECK(fs::exists(out / "a" / "summary.txt"));
  }

  SUBCASE("invalid run names are rejected") {
    write_text(tmp.path() / "names.yaml", "base: base.yaml\nruns:\n  - {name: ../escape}\n");
    CHECK(cli({"sweep", "--config", (tmp.path() / "names.yaml").string(), "--out-dir", (tmp.path() / "o").string()})
              .code == 1);
  }
}

TEST_CASE("effluent substrate grows with the flow speed") {
  TempDir tmp;
  const fs::path out = tmp.path() / "sweep";
  const auto inv = cli({"sweep", "--config", std::string(BIOREACTOR_SCENARIO_DIR) + "/sweep_flow.yaml", "--out-dir",
                        out.string(), "--threads", "3"});
  CHECK(inv.code == 0);
  const auto rows = read_lines(out / "sweep_summary.csv");
  REQUIRE(rows.size() == 4);
  std::vector<double> effluent;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream row(rows[i]);
    std::string name, status, value;
    std::getline(row, name, ',');
    std::getline(row, status, ',');
    std::getline(row, value, ',');
    effluent.push_back(std::stod(value));
  }
  // Regression snapshot of the shipped sweep: 0.132, 0.390, 0.909.
  CHECK(effluent[0] < effluent[1]);
  CHECK(effluent[1] < effluent[2]);
  CHECK(effluent[0] == doctest::Approx(0.132).epsilon(0.01));
  CHECK(effluent[2] == doctest::Approx(0.909).epsilon(0.01));
}

TEST_CASE("snapshot levels") {
  CHECK(app::snapshot_levels(100, 10).size() == 12);
  CHECK(app::snapshot_levels(20, 4) == std::vector<std::size_t>{0, 4, 8, 12, 16, 20});
  CHECK(app::snapshot_levels(0, 10) == std::vector<std::size_t>{0});
  CHECK(app::snapshot_levels(5, 0) == std::vector<std::size_t>{0, 5});
}

TEST_CASE("trajectory csv round trip") {
  ScenarioConfig config = parse_config(kSmall);
  const auto result = simulate(config);
  std::stringstream buffer;
  app::write_trajectory_csv(buffer, result.trajectory);
  const Trajectory back = app::read_trajectory_csv(buffer, result.mesh.num_cells());
  REQUIRE(back.states.size() == result.trajectory.states.size());
  for (std::size_t k = 0; k < back.states.size(); ++k) {
    CHECK(back.states[k].S == result.trajectory.states[k].S);
    CHECK(back.states[k].B == result.trajectory.states[k].B);
  }
}
