#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvcrack/constitutive.hpp"
#include "kvcrack/cracked_space.hpp"
#include "kvcrack/fem.hpp"
#include "kvcrack/loads.hpp"

namespace kvcrack {

/// How the regularisation weight follows the time grid.
struct EpsRegPolicy {
  bool coupled = true;  // eps_reg = 1/n
  double value = 0.0;   // used when !coupled

  double resolve(int n) const { return coupled ? 1.0 / n : value; }
};

struct SolverConfig {
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  /// Eigenvalue floor delta_H of the per-element tangent of G^{-1}.
  double hessian_floor = 1e-10;
  EpsRegPolicy eps_reg_policy;
  /// Start Newton from the previous step's solution instead of zero.
  bool warm_start = true;
  int threads = 1;
};

struct SolveStats {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  /// J_k at the start and after every accepted Newton step.
  std::vector<double> energy_history;
};

/// Discrete solution at t_k = k tau. Nodal fields are expanded (one entry
/// pair per side-resolved vertex); sigma is per element.
struct StepState {
  int k = 0;
  double t = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd du;
  Eigen::VectorXd ddu;
  std::vector<SymTensor2> sigma;
  SolveStats stats;
};

class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double T, int n) : T_(T), n_(n) {}

  double T() const { return T_; }
  int n() const { return n_; }
  double tau() const { return T_ / n_; }
  const std::vector<StepState>& states() const { return states_; }
  const StepState& state(int k) const { return states_.at(static_cast<std::size_t>(k)); }
  std::size_t size() const { return states_.size(); }
  bool complete() const { return states_.size() == static_cast<std::size_t>(n_) + 1; }
  void append(StepState s) { states_.push_back(std::move(s)); }

  /// Piecewise-affine interpolants: u_n(t) = u_k + (t - k tau) du_k and
  /// velocity(t) = du_k + (t - k tau) ddu_k on [(k-1) tau, k tau].
  Eigen::VectorXd u_affine(double t) const;
  Eigen::VectorXd velocity_affine(double t) const;
  /// Right-continuous u_k on ((k-1) tau, k tau], equal to u_0 at t = 0.
  Eigen::VectorXd u_plus(double t) const;
  Eigen::VectorXd velocity_plus(double t) const;
  /// u_{k-1} on [(k-1) tau, k tau), equal to u_n at t = T.
  Eigen::VectorXd u_minus(double t) const;
  Eigen::VectorXd velocity_minus(double t) const;

 private:
  int interval(double t) const;
  int plus_index(double t) const;
  int minus_index(double t) const;

  double T_ = 1.0;
  int n_ = 1;
  std::vector<StepState> states_;
};

/// Newton or line search failure in one step.
struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& what, int step, double residual)
      : std::runtime_error(what), step(step), residual(residual) {}
  int step;
  double residual;
};

struct NonConvergence : SolverFailure {
  using SolverFailure::SolverFailure;
};

struct LineSearchStall : SolverFailure {
  using SolverFailure::SolverFailure;
};

/// Data of step k taken from the load schedule.
struct StepInputs {
  int k = 1;
  double tau = 1.0;
  Eigen::VectorXd z, dz, ddz, f;   // at step k
  Eigen::VectorXd z_prev, dz_prev;  // at step k - 1

  static StepInputs from_schedule(const LoadSchedule& schedule, int k);
};

/// The convex problem solved in step k over the free DOFs x of V_k:
///
///   J(x) = 1/(2 tau^2) |P x - a|_H^2 + (1/c) sum_t area_t phi*(c e(P x)_t + h_t)
///
/// with c = 1 + 1/tau, h_t = e(-v_{k-1}/tau + z_k + dz_k)_t, and a collecting
/// v_{k-1} + tau dv_{k-1} - tau^2 ddz_k + tau^2 f_k. Its gradient is the
/// discrete residual F_k, whose zero gives v_k = u_k - z_k.
class StepProblem {
 public:
  StepProblem(const FemOperators& ops, const DofMap& dofs, const ConstitutiveLaw& law,
              const StepState& prev, const StepInputs& in, int threads = 1);

  const DofMap& dofs() const { return *dofs_; }
  double c() const { return c_; }

  double energy(const Eigen::VectorXd& x) const;
  Eigen::VectorXd residual(const Eigen::VectorXd& x) const;
  /// Newton matrix with the tangent of G^{-1} floored at `eig_floor`.
  Eigen::SparseMatrix<double> hessian(const Eigen::VectorXd& x, double eig_floor) const;

  /// Initial guess: previous v_{k-1} restricted to the free DOFs.
  Eigen::VectorXd warm_start() const;

 private:
  std::vector<SymTensor2> element_arguments(const Eigen::VectorXd& full) const;

  const FemOperators* ops_;
  const DofMap* dofs_;
  ConstitutiveLaw law_;
  double tau_;
  double c_;
  int threads_;
  Eigen::VectorXd target_;        // a
  Eigen::VectorXd v_prev_;        // v_{k-1}
  std::vector<SymTensor2> h_;     // per-element offset
};

/// F_k(v) as a reduced dual vector. `v` is expanded and must satisfy the
/// constraints of `dofs`. The k-2 history enters through prev.du.
Eigen::VectorXd step_residual(const FemOperators& ops, const DofMap& dofs,
                              const ConstitutiveLaw& law, const StepState& prev,
                              const StepInputs& in, const Eigen::VectorXd& v);

/// Minimises J_k by Newton with Armijo backtracking; returns the full state
/// u_k = v_k + z_k with difference quotients and sigma_k = G^{-1}(e u_k + e du_k).
/// Throws NonConvergence or LineSearchStall.
StepState step_solve(const FemOperators& ops, const DofMap& dofs, const ConstitutiveLaw& law,
                     const StepState& prev, const StepInputs& in, const SolverConfig& config,
                     const Eigen::VectorXd* initial_guess = nullptr);

/// State at k = 0 from the initial data.
StepState initial_state(const FemOperators& ops, const ConstitutiveLaw& law, const LoadData& loads);

struct RunResult {
  Trajectory trajectory;
  std::optional<std::string> failure;
  int failed_step = 0;
  double failed_residual = 0.0;

  bool ok() const { return !failure.has_value(); }
};

/// Steps k = 1..n, releasing crack ties before step k for every segment with
/// release_time <= k tau. Stops at the first solver failure and returns the
/// partial trajectory.
RunResult run(const CrackedSpace& space, const ConstitutiveLaw& law, const LoadData& loads,
              double T, int n, const SolverConfig& config);

/// Quantities bounded uniformly in n by the discrete energy estimate.
struct EstimateReport {
  double max_u_v = 0.0;           // max_i ||u_i||_V
  double max_du_h = 0.0;          // max_i ||du_i||_H
  double sum_du_v = 0.0;          // sum_i tau ||du_i||_V^{p'}
  double sum_sigma_p = 0.0;       // sum_i tau ||sigma_i||_p^p
  double sum_ddu_h = 0.0;         // sum_i tau ||ddu_i||_H^2

  std::array<double, 5> values() const {
    return {max_u_v, max_du_h, sum_du_v, sum_sigma_p, sum_ddu_h};
  }
};

EstimateReport discrete_estimate_report(const Trajectory& traj, const FemOperators& ops,
                                        const ConstitutiveLaw& law);

}  // namespace kvcrack
