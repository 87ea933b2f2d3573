#include "app.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace bioreactor::app {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Substrate/biomass reactor simulator with invariant checks", "bioreactor"};
  cli.require_subcommand(1);
  cli.fallthrough();

  CommonOptions options;
  std::string checks;
  cli.add_option("--config", options.config, "Scenario file (sweep file for `sweep`)");
  cli.add_option("--out-dir", options.out_dir, "Output directory")->capture_default_str();
  cli.add_flag("--verbose", options.verbose, "Progress messages and per-step residual log");
  cli.add_option("--checks", checks, "Run invariant checks")->check(CLI::IsMember({"on", "off"}));
  cli.add_option("--threads", options.threads, "Worker threads for sweeps and studies")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* run = cli.add_subcommand("run", "Simulate one scenario and write fields and diagnostics");
  auto* sweep = cli.add_subcommand("sweep", "Run a list of parameter overrides of a base scenario");
  auto* mms = cli.add_subcommand("mms", "Manufactured-solution convergence studies");
  auto* check = cli.add_subcommand("check", "Re-run diagnostics on a stored trajectory");
  std::string which = "all";
  mms->add_option("--case", which, "Study to run")
      ->check(CLI::IsMember({"all", "diffusion", "advection", "temporal"}))
      ->capture_default_str();

  try {
    cli.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  if (!checks.empty()) {
    options.checks = checks == "on";
  }

  if (run->parsed()) {
    return run_command(options, out, err);
  }
  if (sweep->parsed()) {
    return sweep_command(options, out, err);
  }
  if (mms->parsed()) {
    return mms_command(options, which, out, err);
  }
  if (check->parsed()) {
    return check_command(options, out, err);
  }
  return kConfigError;
}

}  // namespace bioreactor::app
