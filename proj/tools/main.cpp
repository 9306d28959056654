#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "borelq/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"borelq: Borel kinematics, nonlinear Schrodinger dynamics and gauge checks"};
  app.require_subcommand(1);

  std::string evolve_config;
  auto* evolve = app.add_subcommand("evolve", "Run the dynamics described by a config file");
  evolve->add_option("config", evolve_config, "INI config")->required();

  std::string suite;
  std::string report;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "algebra | imprimitivity | poisson | ehrenfest-classical | all")->required();
  verify->add_option("--report", report, "Also write the JSON report to this file");

  double phi0 = 0.0;
  double e = 1.0;
  double hbar = 1.0;
  auto* check = app.add_subcommand("check-field", "Dirac admissibility of a constant field on the torus");
  check->add_option("--phi0", phi0, "Constant field value")->required();
  check->add_option("--e", e, "Coupling (charge)");
  check->add_option("--hbar", hbar, "Planck constant");

  std::string gauge_config;
  auto* gauge = app.add_subcommand("gauge-fit", "Fit gauge images of a linear trajectory");
  gauge->add_option("config", gauge_config, "INI config with a [gauge] section")->required();

  std::string sweep_dir;
  auto* sweep = app.add_subcommand("sweep", "Run every config in a directory");
  sweep->add_option("dir", sweep_dir, "Directory of INI configs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : borelq::cli::kExitInvalid;
  }

  if (*evolve) return borelq::cli::cmd_evolve(evolve_config, std::cout, std::cerr);
  if (*verify) {
    std::optional<std::filesystem::path> path;
    if (!report.empty()) path = report;
    return borelq::cli::cmd_verify(suite, std::cout, std::cerr, path);
  }
  if (*check) return borelq::cli::cmd_check_field(phi0, e, hbar, std::cout, std::cerr);
  if (*gauge) return borelq::cli::cmd_gauge_fit(gauge_config, std::cout, std::cerr);
  if (*sweep) return borelq::cli::cmd_sweep(sweep_dir, std::cout, std::cerr);
  return borelq::cli::kExitInvalid;
}
