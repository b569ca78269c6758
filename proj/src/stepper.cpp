#include "kvcrack/stepper.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "kvcrack/parallel.hpp"

namespace kvcrack {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

}  // namespace

// ---------------------------------------------------------------- Trajectory

int Trajectory::interval(double t) const {
  const int k = static_cast<int>(std::ceil(t / tau() - 1e-9));
  return std::clamp(k, 1, n_);
}

int Trajectory::plus_index(double t) const {
  if (t <= 0.0) return 0;
  return interval(t);
}

int Trajectory::minus_index(double t) const {
  if (t >= T_) return n_;
  const int k = static_cast<int>(std::floor(t / tau() + 1e-9));
  return std::clamp(k, 0, n_ - 1);
}

Eigen::VectorXd Trajectory::u_affine(double t) const {
  const int k = interval(t);
  const StepState& s = state(k);
  return s.u + (t - k * tau()) * s.du;
}

Eigen::VectorXd Trajectory::velocity_affine(double t) const {
  const int k = interval(t);
  const StepState& s = state(k);
  return s.du + (t - k * tau()) * s.ddu;
}

Eigen::VectorXd Trajectory::u_plus(double t) const { return state(plus_index(t)).u; }
Eigen::VectorXd Trajectory::velocity_plus(double t) const { return state(plus_index(t)).du; }
Eigen::VectorXd Trajectory::u_minus(double t) const { return state(minus_index(t)).u; }
Eigen::VectorXd Trajectory::velocity_minus(double t) const { return state(minus_index(t)).du; }

// ---------------------------------------------------------------- StepInputs

StepInputs StepInputs::from_schedule(const LoadSchedule& schedule, int k) {
  if (k < 1 || k > schedule.n()) throw std::out_of_range("step index outside 1..n");
  StepInputs in;
  in.k = k;
  in.tau = schedule.tau();
  in.z = schedule.z(k);
  in.dz = schedule.dz(k);
  in.ddz = schedule.ddz(k);
  in.f = schedule.f(k);
  in.z_prev = schedule.z(k - 1);
  in.dz_prev = schedule.dz(k - 1);
  return in;
}

// ---------------------------------------------------------------- StepProblem

StepProblem::StepProblem(const FemOperators& ops, const DofMap& dofs, const ConstitutiveLaw& law,
                         const StepState& prev, const StepInputs& in, int threads)
    : ops_(&ops),
      dofs_(&dofs),
      law_(law),
      tau_(in.tau),
      c_(1.0 + 1.0 / in.tau),
      threads_(threads) {
  const auto size = static_cast<Eigen::Index>(ops.mesh().num_dofs());
  if (prev.u.size() != size || prev.du.size() != size || in.z.size() != size ||
      in.f.size() != size || static_cast<Eigen::Index>(dofs.reduced.size()) != size) {
    throw std::invalid_argument("step data does not match the mesh size");
  }
  v_prev_ = prev.u - in.z_prev;
  const Eigen::VectorXd dv_prev = prev.du - in.dz_prev;
  const double t2 = tau_ * tau_;
  target_ = v_prev_ + tau_ * dv_prev - t2 * in.ddz + t2 * in.f;
  // Dirichlet rows only shift J by a constant.
  for (Eigen::Index i = 0; i < size; ++i) {
    if (dofs.reduced[static_cast<std::size_t>(i)] < 0) target_[i] = 0.0;
  }
  h_ = ops.strains(in.z + in.dz - v_prev_ / tau_);
}

std::vector<SymTensor2> StepProblem::element_arguments(const Eigen::VectorXd& full) const {
  const std::size_t ne = ops_->num_elements();
  std::vector<SymTensor2> eta(ne);
  parallel_for(ne, threads_, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) eta[t] = c_ * ops_->strain(t, full) + h_[t];
  });
  return eta;
}

Eigen::VectorXd StepProblem::warm_start() const { return dofs_->restrict_values(v_prev_); }

double StepProblem::energy(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd full = dofs_->prolong(x);
  const std::vector<SymTensor2> eta = element_arguments(full);
  const std::size_t ne = eta.size();
  std::vector<double> local(ne);
  parallel_for(ne, threads_, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) local[t] = ops_->area(t) * phi_star(law_, eta[t]);
  });
  double elem = 0.0;
  for (double v : local) elem += v;
  const Eigen::VectorXd d = full - target_;
  return ops_->h_inner(d, d) / (2.0 * tau_ * tau_) + elem / c_;
}

Eigen::VectorXd StepProblem::residual(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd full = dofs_->prolong(x);
  const std::vector<SymTensor2> eta = element_arguments(full);
  const std::size_t ne = eta.size();
  std::vector<Eigen::Matrix<double, 6, 1>> local(ne);
  parallel_for(ne, threads_, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      local[t] = ops_->area(t) * ops_->strain_op(t).transpose() *
                 g_inverse(law_, eta[t]).to_orthonormal();
    }
  });
  Eigen::VectorXd g =
      ops_->lumped_mass().cwiseProduct(full - target_) / (tau_ * tau_);
  for (std::size_t t = 0; t < ne; ++t) {
    const auto& tri = ops_->triangle(t);
    for (int i = 0; i < 3; ++i) {
      g[2 * tri[i]] += local[t][2 * i];
      g[2 * tri[i] + 1] += local[t][2 * i + 1];
    }
  }
  return dofs_->restrict_dual(g);
}

Eigen::SparseMatrix<double> StepProblem::hessian(const Eigen::VectorXd& x, double eig_floor) const {
  const Eigen::VectorXd full = dofs_->prolong(x);
  const std::vector<SymTensor2> eta = element_arguments(full);
  const std::size_t ne = eta.size();
  double eta_max = 0.0;
  for (const SymTensor2& e : eta) eta_max = std::max(eta_max, norm(e));
  const double min_norm = std::max(1e-8 * eta_max, 1e-14);

  std::vector<Eigen::Matrix<double, 6, 6>> local(ne);
  parallel_for(ne, threads_, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      const Eigen::Matrix3d d = inverse_tangent(law_, eta[t], min_norm, eig_floor);
      const StrainMatrix& bt = ops_->strain_op(t);
      local[t] = (ops_->area(t) * c_) * bt.transpose() * d * bt;
    }
  });

  const auto& red = dofs_->reduced;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(ne * 36 + red.size());
  const Eigen::VectorXd& mass = ops_->lumped_mass();
  for (std::size_t i = 0; i < red.size(); ++i) {
    if (red[i] >= 0) trip.emplace_back(red[i], red[i], mass[static_cast<Eigen::Index>(i)] / (tau_ * tau_));
  }
  for (std::size_t t = 0; t < ne; ++t) {
    const auto& tri = ops_->triangle(t);
    int idx[6];
    for (int i = 0; i < 3; ++i) {
      idx[2 * i] = red[static_cast<std::size_t>(2 * tri[i])];
      idx[2 * i + 1] = red[static_cast<std::size_t>(2 * tri[i] + 1)];
    }
    for (int a = 0; a < 6; ++a) {
      if (idx[a] < 0) continue;
      for (int b = 0; b < 6; ++b) {
        if (idx[b] < 0) continue;
        trip.emplace_back(idx[a], idx[b], local[t](a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> h(dofs_->num_reduced, dofs_->num_reduced);
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

// ---------------------------------------------------------------- solve

Eigen::VectorXd step_residual(const FemOperators& ops, const DofMap& dofs,
                              const ConstitutiveLaw& law, const StepState& prev,
                              const StepInputs& in, const Eigen::VectorXd& v) {
  const StepProblem problem(ops, dofs, law, prev, in);
  if (v.size() != static_cast<Eigen::Index>(ops.mesh().num_dofs())) {
    throw std::invalid_argument("step_residual: v has the wrong size");
  }
  return problem.residual(dofs.restrict_values(v));
}

namespace {

StepState finish_state(const FemOperators& ops, const DofMap& dofs, const ConstitutiveLaw& law,
                       const StepState& prev, const StepInputs& in, const Eigen::VectorXd& x) {
  StepState s;
  s.k = in.k;
  s.t = in.k * in.tau;
  s.u = dofs.prolong(x) + in.z;
  s.du = (s.u - prev.u) / in.tau;
  s.ddu = (s.du - prev.du) / in.tau;
  const std::vector<SymTensor2> eu = ops.strains(s.u);
  const std::vector<SymTensor2> edu = ops.strains(s.du);
  s.sigma.resize(eu.size());
  for (std::size_t t = 0; t < eu.size(); ++t) s.sigma[t] = g_inverse(law, eu[t] + edu[t]);
  return s;
}

}  // namespace

StepState step_solve(const FemOperators& ops, const DofMap& dofs, const ConstitutiveLaw& law,
                     const StepState& prev, const StepInputs& in, const SolverConfig& config,
                     const Eigen::VectorXd* initial_guess) {
  const StepProblem problem(ops, dofs, law, prev, in, config.threads);
  Eigen::VectorXd x;
  if (initial_guess != nullptr) {
    if (initial_guess->size() != dofs.num_reduced) {
      throw std::invalid_argument("initial guess has the wrong size");
    }
    x = *initial_guess;
  } else if (config.warm_start) {
    x = problem.warm_start();
  } else {
    x = Eigen::VectorXd::Zero(dofs.num_reduced);
  }

  SolveStats stats;
  double j = problem.energy(x);
  Eigen::VectorXd g = problem.residual(x);
  double r = g.norm();
  stats.initial_residual = r;
  stats.energy_history.push_back(j);
  const double target = config.newton_tol * std::max(1.0, r);

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analysed = false;
  while (r > target) {
    if (stats.iterations >= config.newton_max_iter) {
      std::ostringstream msg;
      msg << "Newton did not converge in step " << in.k << " after " << stats.iterations
          << " iterations (residual " << r << ", target " << target << ")";
      throw NonConvergence(msg.str(), in.k, r);
    }
    const Eigen::SparseMatrix<double> h = problem.hessian(x, config.hessian_floor);
    if (!analysed) {
      ldlt.analyzePattern(h);
      analysed = true;
    }
    ldlt.factorize(h);
    Eigen::VectorXd d;
    if (ldlt.info() == Eigen::Success) d = ldlt.solve(-g);
    double slope = d.size() == g.size() ? g.dot(d) : 0.0;
    if (!(slope < 0.0) || !d.allFinite()) {
      d = -g;
      slope = -r * r;
    }

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    double jn = 0.0;
    Eigen::VectorXd gn;
    for (int ls = 0; ls < kMaxBacktracks; ++ls, alpha *= 0.5) {
      xn = x + alpha * d;
      jn = problem.energy(xn);
      if (jn <= j + kArmijo * alpha * slope) {
        gn = problem.residual(xn);
        accepted = true;
        break;
      }
      // Near the minimiser J changes below its rounding level; fall back on
      // the residual norm there.
      if (std::abs(jn - j) <= 1e-12 * (std::abs(j) + std::abs(jn))) {
        gn = problem.residual(xn);
        if (gn.norm() < r) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search stalled in step " << in.k << " (residual " << r << ")";
      throw LineSearchStall(msg.str(), in.k, r);
    }
    x = std::move(xn);
    j = jn;
    g = std::move(gn);
    r = g.norm();
    ++stats.iterations;
    stats.energy_history.push_back(j);
  }
  stats.final_residual = r;

  StepState s = finish_state(ops, dofs, law, prev, in, x);
  s.stats = std::move(stats);
  return s;
}

StepState initial_state(const FemOperators& ops, const ConstitutiveLaw& law, const LoadData& loads) {
  const auto size = static_cast<Eigen::Index>(ops.mesh().num_dofs());
  if (loads.u0.size() != size || loads.u1.size() != size) {
    throw std::invalid_argument("initial data does not match the mesh size");
  }
  StepState s;
  s.k = 0;
  s.t = 0.0;
  s.u = loads.u0;
  s.du = loads.u1;
  s.ddu = Eigen::VectorXd::Zero(size);
  const std::vector<SymTensor2> eu = ops.strains(s.u);
  const std::vector<SymTensor2> edu = ops.strains(s.du);
  s.sigma.resize(eu.size());
  for (std::size_t t = 0; t < eu.size(); ++t) s.sigma[t] = g_inverse(law, eu[t] + edu[t]);
  return s;
}

RunResult run(const CrackedSpace& space, const ConstitutiveLaw& law, const LoadData& loads,
              double T, int n, const SolverConfig& config) {
  check_compatibility(space, loads);
  const FemOperators ops(space.mesh());
  const LoadSchedule schedule(space.mesh(), loads, T, n);

  RunResult result;
  result.trajectory = Trajectory(T, n);
  result.trajectory.append(initial_state(ops, law, loads));

  ConstraintSet constraints = space.active_constraints(0.0);
  DofMap dofs = space.dof_map(constraints);
  for (int k = 1; k <= n; ++k) {
    ConstraintSet now = space.active_constraints(schedule.time(k));
    if (!(now == constraints)) {
      constraints = std::move(now);
      dofs = space.dof_map(constraints);
    }
    const StepInputs in = StepInputs::from_schedule(schedule, k);
    try {
      result.trajectory.append(
          step_solve(ops, dofs, law, result.trajectory.states().back(), in, config));
    } catch (const SolverFailure& e) {
      result.failure = e.what();
      result.failed_step = e.step;
      result.failed_residual = e.residual;
      break;
    }
  }
  return result;
}

EstimateReport discrete_estimate_report(const Trajectory& traj, const FemOperators& ops,
                                        const ConstitutiveLaw& law) {
  EstimateReport rep;
  const double q = law.p_conj();
  const double tau = traj.tau();
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const StepState& s = traj.states()[k];
    rep.max_u_v = std::max(rep.max_u_v, ops.v_norm(s.u, q));
    rep.max_du_h = std::max(rep.max_du_h, ops.h_norm(s.du));
    rep.sum_du_v += tau * std::pow(ops.v_norm(s.du, q), q);
    rep.sum_sigma_p += tau * ops.tensor_lq_power(s.sigma, law.p());
    rep.sum_ddu_h += tau * ops.h_inner(s.ddu, s.ddu);
  }
  return rep;
}

}  // namespace kvcrack
