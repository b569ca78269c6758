#include "kvcrack/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace kvcrack {

SolverConfig effective_solver(const Scenario& sc, const CommandOptions& opts) {
  SolverConfig cfg = sc.solver;
  cfg.eps_reg_policy = sc.eps_reg;
  if (opts.threads) cfg.threads = *opts.threads;
  if (opts.newton_tol) {
    if (!(*opts.newton_tol > 0.0)) throw ValidationError("--newton-tol must be positive");
    cfg.newton_tol = *opts.newton_tol;
  }
  return cfg;
}

ScenarioRun run_scenario(const Scenario& sc, int n, const SolverConfig& config) {
  ScenarioRun r;
  r.n = n;
  r.law = ConstitutiveLaw(sc.p, config.eps_reg_policy.resolve(n));
  r.problem = build_problem(sc);
  r.ops = std::make_unique<FemOperators>(r.problem->space.mesh());
  r.result = run(r.problem->space, r.law, r.problem->loads, sc.T, n, config);
  const LoadSchedule schedule(r.problem->space.mesh(), r.problem->loads, sc.T, n);
  r.ledger = build_ledger(r.result.trajectory, r.problem->space, *r.ops, r.law, schedule);
  r.estimates = discrete_estimate_report(r.result.trajectory, *r.ops, r.law);
  return r;
}

double fit_order(const std::vector<double>& tau, const std::vector<double>& err) {
  if (tau.size() != err.size() || tau.size() < 2) throw std::invalid_argument("fit_order: need >= 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto m = static_cast<double>(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!(err[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double x = std::log(tau[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::array<double, 5> estimate_variation(const std::vector<SweepRow>& rows) {
  std::array<double, 5> var{};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto a = rows[i - 1].estimates.values();
    const auto b = rows[i].estimates.values();
    for (std::size_t q = 0; q < 5; ++q) {
      const double scale = std::max(std::abs(a[q]), std::abs(b[q]));
      if (scale > 0.0) var[q] = std::max(var[q], std::abs(b[q] - a[q]) / scale);
    }
  }
  return var;
}

std::vector<int> sweep_grid(const Scenario& sc) {
  std::vector<int> ns = sc.n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 3) {
    throw ValidationError("sweep: need at least 3 distinct values of n for an order fit");
  }
  for (int n : ns) {
    if (n % ns.front() != 0) {
      throw ValidationError("sweep: every n must be a multiple of the smallest (" +
                            std::to_string(ns.front()) + ")");
    }
  }
  return ns;
}

SweepReport sweep(const Scenario& sc, const SolverConfig& config) {
  SweepReport rep;
  std::vector<double> taus, kv, gen;
  for (int n : sweep_grid(sc)) {
    const ScenarioRun r = run_scenario(sc, n, config);
    if (!r.result.ok()) {
      throw SolverFailure("n = " + std::to_string(n) + ": " + *r.result.failure, r.result.failed_step,
                          r.result.failed_residual);
    }
    rep.rows.push_back({n, r.ledger.max_abs_residual_kv(), r.ledger.max_abs_residual_general(), r.estimates});
    taus.push_back(sc.T / n);
    kv.push_back(rep.rows.back().max_residual_kv);
    gen.push_back(rep.rows.back().max_residual_general);
  }
  rep.order_kv = fit_order(taus, kv);
  rep.order_general = fit_order(taus, gen);
  rep.variation = estimate_variation(rep.rows);
  rep.bounded = std::all_of(rep.variation.begin(), rep.variation.end(), [](double v) { return v < 0.1; });
  return rep;
}

ParadoxStudy paradox_study(const Scenario& sc, const SolverConfig& config,
                           std::unique_ptr<ScenarioRun>* finest_run) {
  const bool grows = std::any_of(sc.release_times.begin(), sc.release_times.end(),
                                 [&](double t) { return t > 0.0 && t < sc.T; });
  if (!grows) {
    throw ValidationError("paradox: the crack must have a segment released in (0, T)");
  }
  std::vector<int> ns = sc.n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  ParadoxStudy study;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    auto r = std::make_unique<ScenarioRun>(run_scenario(sc, ns[i], config));
    if (!r->result.ok()) {
      throw SolverFailure("n = " + std::to_string(ns[i]) + ": " + *r->result.failure,
                          r->result.failed_step, r->result.failed_residual);
    }
    study.n.push_back(ns[i]);
    study.max_residual_kv.push_back(r->ledger.max_abs_residual_kv());
    study.final_defect.push_back(-r->ledger.rows.back().residual_kv);
    const double e0 = r->ledger.rows.front().mech_energy();
    study.tolerance.push_back(sc.paradox_tol_fraction *
                              std::max({r->ledger.max_abs_work(), e0, 1e-12}));
    if (i + 1 == ns.size()) {
      if (finest_run != nullptr) *finest_run = std::move(r);
      const ScenarioRun& fr = finest_run != nullptr ? **finest_run : *r;
      study.finest = paradox_report(fr.ledger, fr.problem->space, sc.paradox_tol_fraction);
    }
  }
  return study;
}

namespace {

void write_run_outputs(const Scenario& sc, const ScenarioRun& r, const CommandOptions& opts) {
  write_ledger_csv(opts.out_dir / sc.outputs.ledger, r.ledger);
  if (!sc.outputs.snapshots) return;
  const int stride = sc.snapshot_stride(r.n);
  const auto& states = r.result.trajectory.states();
  for (const StepState& s : states) {
    if (s.k % stride == 0 || s.k == r.n) write_snapshot(opts.out_dir, r.problem->space, *r.ops, s);
  }
}

void print_summary(const ScenarioRun& r, std::ostream& out) {
  const LedgerRow& last = r.ledger.rows.back();
  int total = 0;
  int worst = 0;
  for (const StepState& s : r.result.trajectory.states()) {
    total += s.stats.iterations;
    worst = std::max(worst, s.stats.iterations);
  }
  out << std::setprecision(6);
  out << "steps completed      " << last.k << " / " << r.n << "\n";
  out << "kinetic energy       " << last.kinetic << "\n";
  out << "elastic energy       " << last.elastic << "\n";
  out << "viscous dissipation  " << last.viscous_cum << "\n";
  out << "total work           " << last.work_cum << "\n";
  out << "crack growth         " << last.crack_cum << "\n";
  out << "max |residual_kv|    " << r.ledger.max_abs_residual_kv() << "\n";
  out << "max |residual_gen|   " << r.ledger.max_abs_residual_general() << "\n";
  out << "newton iterations    " << total << " total, " << worst << " max per step\n";
}

std::string format_order(double v) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

int cmd_run(const Scenario& sc, const CommandOptions& opts, std::ostream& out) {
  if (sc.n_list.size() != 1) throw ValidationError("run: time.n must be a single value");
  for (const std::string& w : sc.warnings) out << "warning: " << w << "\n";
  const SolverConfig cfg = effective_solver(sc, opts);
  const ScenarioRun r = run_scenario(sc, sc.n_list.front(), cfg);
  write_run_outputs(sc, r, opts);
  if (sc.outputs.summary) print_summary(r, out);
  if (!r.result.ok()) {
    out << "solver failure: " << *r.result.failure << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_sweep(const Scenario& sc, const CommandOptions& opts, std::ostream& out) {
  for (const std::string& w : sc.warnings) out << "warning: " << w << "\n";
  const SolverConfig cfg = effective_solver(sc, opts);
  SweepReport rep;
  try {
    rep = sweep(sc, cfg);
  } catch (const SolverFailure& e) {
    out << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  atomic_write(opts.out_dir / "sweep.csv", sweep_csv(rep.rows));
  out << std::setprecision(6);
  out << "n        max|res_kv|    max|res_gen|\n";
  for (const SweepRow& r : rep.rows) {
    out << std::setw(8) << std::left << r.n << ' ' << std::setw(14) << r.max_residual_kv << ' '
        << r.max_residual_general << "\n";
  }
  out << "observed order (kv)       " << format_order(rep.order_kv) << "\n";
  out << "observed order (general)  " << format_order(rep.order_general) << "\n";
  out << "estimate variation        ";
  for (double v : rep.variation) out << v << ' ';
  out << "\n" << (rep.bounded ? "BOUNDED" : "NOT BOUNDED") << "\n";
  return kExitOk;
}

int cmd_paradox(const Scenario& sc, const CommandOptions& opts, std::ostream& out) {
  for (const std::string& w : sc.warnings) out << "warning: " << w << "\n";
  const SolverConfig cfg = effective_solver(sc, opts);
  std::unique_ptr<ScenarioRun> finest;
  ParadoxStudy study;
  try {
    study = paradox_study(sc, cfg, &finest);
  } catch (const SolverFailure& e) {
    out << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InconclusiveResolution& e) {
    if (finest) write_ledger_csv(opts.out_dir / sc.outputs.ledger, finest->ledger);
    out << "INCONCLUSIVE: " << e.what() << "\n";
    return kExitInconclusive;
  }
  write_ledger_csv(opts.out_dir / sc.outputs.ledger, finest->ledger);

  std::ostringstream rep;
  rep << std::setprecision(6);
  rep << "n        max|res_kv|    defect(T)      tolerance\n";
  for (std::size_t i = 0; i < study.n.size(); ++i) {
    rep << std::setw(8) << std::left << study.n[i] << ' ' << std::setw(14) << study.max_residual_kv[i]
        << ' ' << std::setw(14) << study.final_defect[i] << ' ' << study.tolerance[i] << "\n";
  }
  const ParadoxReport& p = study.finest;
  rep << "crack growth         " << p.crack_final << " of path length " << p.path_length << "\n";
  rep << "max |residual_kv|    " << p.max_abs_residual_kv << " (tolerance " << p.tolerance << ")\n";
  rep << "implied toughness    " << p.implied_toughness << "\n";
  rep << "verdict              " << p.verdict_text() << "\n";
  atomic_write(opts.out_dir / "paradox.txt", rep.str());
  out << rep.str();
  return kExitOk;
}

int cmd_check(const CommandOptions& opts, std::ostream& out) {
  std::mt19937_64 rng(opts.seed.value_or(1));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> logmag(-6.0, 6.0);
  auto sample = [&] {
    const SymTensor2 d{unit(rng), unit(rng), unit(rng)};
    const double n = norm(d);
    return n > 0.0 ? std::pow(10.0, logmag(rng)) / n * d : SymTensor2{1.0, 0.0, 0.0};
  };
  bool all = true;
  out << std::setprecision(3);
  for (double p : {1.5, 2.0, 3.0}) {
    for (double eps : {0.0, 0.1}) {
      const ConstitutiveLaw law(p, eps);
      double mono = 0.0, roundtrip = 0.0, fy = 0.0;
      std::vector<SymTensor2> samples;
      for (int i = 0; i < 2000; ++i) {
        const SymTensor2 a = sample();
        const SymTensor2 b = sample();
        samples.push_back(a);
        const SymTensor2 ga = g_apply(law, a);
        const SymTensor2 gb = g_apply(law, b);
        const double scale = norm(ga) * norm(a) + norm(gb) * norm(b);
        mono = std::min(mono, dot(ga - gb, a - b) / scale);
        roundtrip = std::max(roundtrip, norm(g_inverse(law, ga) - a) / norm(a));
        fy = std::max(fy, std::abs(phi(law, a) + phi_star(law, ga) - dot(ga, a)) / dot(ga, a));
      }
      const GrowthReport growth = check_growth_bounds(law, samples);
      const bool ok = mono >= -1e-12 && roundtrip <= 1e-10 && fy <= 1e-10 && growth.pass;
      all = all && ok;
      out << (ok ? "PASS" : "FAIL") << "  p=" << p << " eps=" << eps << "  monotone_min=" << mono
          << " roundtrip=" << roundtrip << " fenchel_young=" << fy
          << " growth_margin=" << growth.worst_margin << "\n";
    }
  }
  return all ? kExitOk : kExitSolver;
}

}  // namespace kvcrack
