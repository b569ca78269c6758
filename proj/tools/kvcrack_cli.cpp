// Command-line driver: run, sweep, paradox, check.

#include <CLI11.hpp>
#include <iostream>

#include "kvcrack/commands.hpp"

int main(int argc, char** argv) {
  using namespace kvcrack;
  CLI::App app{"Kelvin-Voigt power-law simulator on a domain with a growing crack"};
  app.require_subcommand(1);
  app.fallthrough();

  CommandOptions opts;
  std::string out_dir = ".";
  int threads = 0;
  double newton_tol = 0.0;
  std::uint64_t seed = 0;
  app.add_option("--out-dir", out_dir, "Directory for ledger, snapshots and reports");
  auto* threads_opt = app.add_option("--threads", threads, "Assembly threads")->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--newton-tol", newton_tol, "Relative Newton residual tolerance")
                      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for the randomised property driver");

  std::string scenario_path;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write the energy ledger");
  run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an n-list and fit convergence orders");
  sweep_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  auto* paradox_cmd = app.add_subcommand("paradox", "Energy balance against crack growth");
  paradox_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  auto* check_cmd = app.add_subcommand("check", "Randomised constitutive property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  opts.out_dir = out_dir;
  if (*threads_opt) opts.threads = threads;
  if (*tol_opt) opts.newton_tol = newton_tol;
  if (*seed_opt) opts.seed = seed;

  try {
    if (check_cmd->parsed()) return cmd_check(opts, std::cout);
    const Scenario sc = parse_scenario(scenario_path);
    if (run_cmd->parsed()) return cmd_run(sc, opts, std::cout);
    if (sweep_cmd->parsed()) return cmd_sweep(sc, opts, std::cout);
    if (paradox_cmd->parsed()) return cmd_paradox(sc, opts, std::cout);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const InconclusiveResolution& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}
