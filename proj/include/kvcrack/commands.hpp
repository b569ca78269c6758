#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "kvcrack/energy.hpp"
#include "kvcrack/fem.hpp"
#include "kvcrack/io.hpp"
#include "kvcrack/scenario.hpp"
#include "kvcrack/stepper.hpp"

namespace kvcrack {

enum ExitCode : int { kExitOk = 0, kExitSolver = 1, kExitInvalid = 2, kExitInconclusive = 3 };

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  /// Override the scenario's solver settings when set.
  std::optional<int> threads;
  std::optional<double> newton_tol;
  std::optional<std::uint64_t> seed;
};

/// One simulated n with everything derived from it. Heap members keep the
/// mesh address stable for the operators.
struct ScenarioRun {
  int n = 0;
  ConstitutiveLaw law{2.0, 0.0};
  std::unique_ptr<Problem> problem;
  std::unique_ptr<FemOperators> ops;
  RunResult result;
  EnergyLedger ledger;
  EstimateReport estimates;
};

SolverConfig effective_solver(const Scenario& sc, const CommandOptions& opts);
ScenarioRun run_scenario(const Scenario& sc, int n, const SolverConfig& config);

/// Least-squares slope of log(err) against log(tau). NaN when any err <= 0.
double fit_order(const std::vector<double>& tau, const std::vector<double>& err);

/// Largest relative change of each estimate quantity between consecutive rows.
std::array<double, 5> estimate_variation(const std::vector<SweepRow>& rows);

struct SweepReport {
  std::vector<SweepRow> rows;
  double order_kv = 0.0;
  double order_general = 0.0;
  std::array<double, 5> variation{};
  bool bounded = false;
};

/// Validates the n-list of a sweep: at least three values, all multiples of
/// the smallest. Throws ValidationError.
std::vector<int> sweep_grid(const Scenario& sc);

/// Runs every n of the list. Throws SolverFailure on the first failed run.
SweepReport sweep(const Scenario& sc, const SolverConfig& config);

struct ParadoxStudy {
  std::vector<int> n;
  std::vector<double> max_residual_kv;
  std::vector<double> final_defect;
  std::vector<double> tolerance;
  ParadoxReport finest;
};

/// Requires a release time in (0, T); throws ValidationError otherwise and
/// InconclusiveResolution when the finest run does not resolve the balance.
ParadoxStudy paradox_study(const Scenario& sc, const SolverConfig& config,
                           std::unique_ptr<ScenarioRun>* finest_run = nullptr);

int cmd_run(const Scenario& sc, const CommandOptions& opts, std::ostream& out);
int cmd_sweep(const Scenario& sc, const CommandOptions& opts, std::ostream& out);
int cmd_paradox(const Scenario& sc, const CommandOptions& opts, std::ostream& out);
/// Randomised constitutive property driver seeded by opts.seed.
int cmd_check(const CommandOptions& opts, std::ostream& out);

}  // namespace kvcrack
