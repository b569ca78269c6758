#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kvcrack/constitutive.hpp"
#include "kvcrack/cracked_space.hpp"
#include "kvcrack/fem.hpp"
#include "kvcrack/loads.hpp"
#include "kvcrack/stepper.hpp"

namespace kvcrack {

/// Three parts of the work increment
/// tau [(f_k, du_k - dz_k)_H + (ddu_k, dz_k)_H + (sigma_k, e dz_k)].
struct WorkIncrement {
  double force = 0.0;
  double inertia = 0.0;
  double stress = 0.0;

  double total() const { return force + inertia + stress; }
};

/// One ledger row. Increments refer to ((k-1) tau, k tau]; row 0 has none.
struct LedgerRow {
  int k = 0;
  double t = 0.0;
  double kinetic = 0.0;
  double elastic = 0.0;
  double viscous_inc = 0.0;
  double viscous_cum = 0.0;
  WorkIncrement work_inc;
  double work_cum = 0.0;
  /// tau (sigma_k, e du_k), the stress power of the general balance.
  double stress_power_inc = 0.0;
  double stress_power_cum = 0.0;
  double crack_inc = 0.0;
  double crack_cum = 0.0;
  double residual_kv = 0.0;
  double residual_general = 0.0;

  double mech_energy() const { return kinetic + elastic; }
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;

  double max_abs_residual_kv() const;
  double max_abs_residual_general() const;
  double max_abs_work() const;
};

double kinetic_energy(const FemOperators& ops, const StepState& state);
/// (1/p') ||e u_k||_{p'}^{p'}
double elastic_energy(const FemOperators& ops, const ConstitutiveLaw& law, const StepState& state);
/// Kinetic plus elastic energy.
double mech_energy(const FemOperators& ops, const ConstitutiveLaw& law, const StepState& state);

/// tau sum_t area_t (G^{-1}(e u_k + e du_k) - G^{-1}(e u_k)) . e du_k with the
/// unregularised inverse |eta|^{p'-2} eta. Nonnegative by monotonicity.
double viscous_increment(const FemOperators& ops, const ConstitutiveLaw& law,
                         const StepState& state, double tau);

/// Uses the stored sigma_k; f and dz are the step-k averages/differences.
WorkIncrement work_increment(const FemOperators& ops, const StepState& state,
                             const Eigen::VectorXd& f, const Eigen::VectorXd& dz, double tau);

/// Ledger of a (possibly partial) trajectory, one row per stored state.
EnergyLedger build_ledger(const Trajectory& traj, const CrackedSpace& space,
                          const FemOperators& ops, const ConstitutiveLaw& law,
                          const LoadSchedule& schedule);

/// E(k) + V(k) - E(0) - W(k) from the stored columns.
double balance_residual_kv(const EnergyLedger& ledger, int k);
/// 1/2 |du_k|^2 + sum tau (sigma, e du) - 1/2 |du_0|^2 - W(k).
double balance_residual_general(const EnergyLedger& ledger, int k);

struct InconclusiveResolution : std::runtime_error {
  InconclusiveResolution(const std::string& what, double residual, double tolerance)
      : std::runtime_error(what), residual(residual), tolerance(tolerance) {}
  double residual;
  double tolerance;
};

enum class ParadoxVerdict { Confirmed, NoGrowth };

struct ParadoxStep {
  int k = 0;
  double t = 0.0;
  double crack_cum = 0.0;
  double abs_residual_kv = 0.0;
  /// E0 + W - E - V: the energy left over for crack growth.
  double griffith_defect = 0.0;
};

struct ParadoxReport {
  ParadoxVerdict verdict = ParadoxVerdict::NoGrowth;
  double tolerance = 0.0;
  double max_abs_residual_kv = 0.0;
  double crack_final = 0.0;
  double path_length = 0.0;
  /// Final defect divided by the crack length it would have to pay for.
  double implied_toughness = 0.0;
  std::vector<ParadoxStep> steps;

  std::string verdict_text() const;
};

/// Compares the balance residual against tol_fraction * max(|W|, E0, floor).
/// Throws InconclusiveResolution when the crack grows but the residual is
/// above the tolerance.
ParadoxReport paradox_report(const EnergyLedger& ledger, const CrackedSpace& space,
                             double tol_fraction = 0.05);

}  // namespace kvcrack
