#include "kvcrack/loads.hpp"

#include <cmath>
#include <string>

namespace kvcrack {

double TimeProfile::value(double t) const {
  switch (family) {
    case Family::Constant:
      return coeffs[0];
    case Family::Polynomial:
      return coeffs[0] + t * (coeffs[1] + t * coeffs[2]);
    case Family::Sinusoidal:
      return amplitude * std::sin(omega * t + phase);
  }
  return 0.0;
}

double TimeProfile::rate(double t) const {
  switch (family) {
    case Family::Constant:
      return 0.0;
    case Family::Polynomial:
      return coeffs[1] + 2.0 * coeffs[2] * t;
    case Family::Sinusoidal:
      return amplitude * omega * std::cos(omega * t + phase);
  }
  return 0.0;
}

double TimeProfile::accel(double t) const {
  switch (family) {
    case Family::Constant:
      return 0.0;
    case Family::Polynomial:
      return 2.0 * coeffs[2];
    case Family::Sinusoidal:
      return -amplitude * omega * omega * std::sin(omega * t + phase);
  }
  return 0.0;
}

double LoadTerm::spatial(const Point2& p) const {
  switch (space) {
    case SpatialProfile::Uniform:
      return 1.0;
    case SpatialProfile::LinearX:
      return p.x - offset;
    case SpatialProfile::LinearY:
      return p.y - offset;
  }
  return 0.0;
}

template <typename TimeFn>
Eigen::VectorXd LoadField::evaluate(const Mesh& mesh, TimeFn&& time_fn) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_dofs()));
  for (const LoadTerm& term : terms_) {
    const double a = time_fn(term.time);
    if (a == 0.0) continue;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      const double s = a * term.spatial(mesh.vertices[v]);
      out[2 * v] += s * term.direction[0];
      out[2 * v + 1] += s * term.direction[1];
    }
  }
  return out;
}

Eigen::VectorXd LoadField::nodal(const Mesh& mesh, double t) const {
  return evaluate(mesh, [t](const TimeProfile& tp) { return tp.value(t); });
}

Eigen::VectorXd LoadField::nodal_rate(const Mesh& mesh, double t) const {
  return evaluate(mesh, [t](const TimeProfile& tp) { return tp.rate(t); });
}

Eigen::VectorXd LoadField::nodal_accel(const Mesh& mesh, double t) const {
  return evaluate(mesh, [t](const TimeProfile& tp) { return tp.accel(t); });
}

LoadData zero_loads(const CrackedSpace& space) {
  LoadData loads;
  const auto n = static_cast<Eigen::Index>(space.mesh().num_dofs());
  loads.u0 = Eigen::VectorXd::Zero(n);
  loads.u1 = Eigen::VectorXd::Zero(n);
  return loads;
}

void check_compatibility(const CrackedSpace& space, const LoadData& loads, double tol) {
  const Mesh& mesh = space.mesh();
  const auto n = static_cast<Eigen::Index>(mesh.num_dofs());
  if (loads.u0.size() != n || loads.u1.size() != n) {
    throw IncompatibleData("initial data does not match the mesh size");
  }
  const Eigen::VectorXd z0 = loads.z.nodal(mesh, 0.0);
  const Eigen::VectorXd dz0 = loads.z.nodal_rate(mesh, 0.0);
  const auto& mask = space.dirichlet_mask();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mask[v]) continue;
    for (int c = 0; c < 2; ++c) {
      const auto i = static_cast<Eigen::Index>(2 * v + c);
      const double scale = std::max(1.0, std::abs(z0[i]));
      if (std::abs(loads.u0[i] - z0[i]) > tol * scale) {
        throw IncompatibleData("(D3) u0 - z(0) does not vanish on the Dirichlet boundary (vertex " +
                               std::to_string(v) + ")");
      }
      if (std::abs(loads.u1[i] - dz0[i]) > tol * std::max(1.0, std::abs(dz0[i]))) {
        throw IncompatibleData(
            "(D3) u1 - z'(0) does not vanish on the Dirichlet boundary (vertex " +
            std::to_string(v) + ")");
      }
    }
  }

  const DofMap map = space.dof_map(space.active_constraints(0.0));
  const Eigen::VectorXd v0 = map.prolong(map.restrict_values(loads.u0 - z0)) + z0;
  const Eigen::VectorXd v1 = map.prolong(map.restrict_values(loads.u1 - dz0)) + dz0;
  if ((v0 - loads.u0).lpNorm<Eigen::Infinity>() > tol * std::max(1.0, loads.u0.lpNorm<Eigen::Infinity>()) ||
      (v1 - loads.u1).lpNorm<Eigen::Infinity>() > tol * std::max(1.0, loads.u1.lpNorm<Eigen::Infinity>())) {
    throw IncompatibleData("initial data is discontinuous across the tied part of the crack");
  }
}

Eigen::VectorXd f_average(const LoadField& f, const Mesh& mesh, int k, double tau) {
  const double a = (k - 1) * tau;
  const double mid = a + 0.5 * tau;
  const double half = 0.5 * tau;
  const double g = std::sqrt(3.0 / 5.0);
  // Weights 5/9, 8/9, 5/9 on [-1, 1]; the average divides by 2.
  return (5.0 / 18.0) * f.nodal(mesh, mid - g * half) + (8.0 / 18.0) * f.nodal(mesh, mid) +
         (5.0 / 18.0) * f.nodal(mesh, mid + g * half);
}

LoadSchedule::LoadSchedule(const Mesh& mesh, const LoadData& loads, double T, int n)
    : T_(T), n_(n), tau_(T / n) {
  if (!(T > 0.0)) throw std::invalid_argument("final time must be positive");
  if (n < 1) throw std::invalid_argument("need at least one time step");
  const auto size = static_cast<Eigen::Index>(mesh.num_dofs());
  z_.resize(n + 1);
  dz_.resize(n + 1);
  ddz_.resize(n + 1);
  f_.resize(n + 1);
  z_[0] = loads.z.nodal(mesh, 0.0);
  dz_[0] = loads.z.nodal_rate(mesh, 0.0);
  ddz_[0] = Eigen::VectorXd::Zero(size);
  f_[0] = Eigen::VectorXd::Zero(size);
  for (int k = 1; k <= n; ++k) {
    z_[k] = loads.z.nodal(mesh, k * tau_);
    dz_[k] = (z_[k] - z_[k - 1]) / tau_;
    ddz_[k] = (dz_[k] - dz_[k - 1]) / tau_;
    f_[k] = f_average(loads.f, mesh, k, tau_);
  }
}

}  // namespace kvcrack
