#pragma once

#include <Eigen/Core>
#include <array>
#include <stdexcept>
#include <vector>

#include "kvcrack/cracked_space.hpp"
#include "kvcrack/mesh.hpp"

namespace kvcrack {

/// Closed family of smooth time profiles.
struct TimeProfile {
  enum class Family { Constant, Polynomial, Sinusoidal };

  Family family = Family::Constant;
  /// Constant uses coeffs[0]; Polynomial is c0 + c1 t + c2 t^2.
  std::array<double, 3> coeffs{};
  /// Sinusoidal is amplitude * sin(omega t + phase).
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double value(double t) const;
  double rate(double t) const;
  double accel(double t) const;
};

enum class SpatialProfile { Uniform, LinearX, LinearY };

/// One separable term time(t) * space(x, y) * direction.
struct LoadTerm {
  TimeProfile time;
  SpatialProfile space = SpatialProfile::Uniform;
  double offset = 0.0;  // LinearX is (x - offset), LinearY is (y - offset)
  std::array<double, 2> direction{1.0, 0.0};

  double spatial(const Point2& p) const;
};

/// Vector field over the domain, a finite sum of load terms (empty = zero).
class LoadField {
 public:
  LoadField() = default;
  explicit LoadField(std::vector<LoadTerm> terms) : terms_(std::move(terms)) {}

  const std::vector<LoadTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Nodal interpolant of the field, its first and second time derivative.
  Eigen::VectorXd nodal(const Mesh& mesh, double t) const;
  Eigen::VectorXd nodal_rate(const Mesh& mesh, double t) const;
  Eigen::VectorXd nodal_accel(const Mesh& mesh, double t) const;

 private:
  template <typename TimeFn>
  Eigen::VectorXd evaluate(const Mesh& mesh, TimeFn&& time_fn) const;

  std::vector<LoadTerm> terms_;
};

/// Body force f, Dirichlet datum z, and nodal initial displacement/velocity.
struct LoadData {
  LoadField f;
  LoadField z;
  Eigen::VectorXd u0;
  Eigen::VectorXd u1;
};

struct IncompatibleData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Zero initial data sized for the space.
LoadData zero_loads(const CrackedSpace& space);

/// Requires u0 = z(0) and u1 = z'(0) on every Dirichlet vertex, and that u0,
/// u1 do not open the initially tied part of the crack. Throws IncompatibleData.
void check_compatibility(const CrackedSpace& space, const LoadData& loads, double tol = 1e-12);

/// Average of f over ((k-1) tau, k tau] by 3-point Gauss-Legendre quadrature.
Eigen::VectorXd f_average(const LoadField& f, const Mesh& mesh, int k, double tau);

/// Per-step data of the uniform grid t_k = k tau: z_k, the backward
/// differences of z (seeded by z'(0) at k = 0), and averaged forces.
class LoadSchedule {
 public:
  LoadSchedule(const Mesh& mesh, const LoadData& loads, double T, int n);

  int n() const { return n_; }
  double tau() const { return tau_; }
  double T() const { return T_; }
  double time(int k) const { return k * tau_; }

  const Eigen::VectorXd& z(int k) const { return z_[k]; }
  const Eigen::VectorXd& dz(int k) const { return dz_[k]; }
  /// Zero at k = 0.
  const Eigen::VectorXd& ddz(int k) const { return ddz_[k]; }
  /// Zero at k = 0.
  const Eigen::VectorXd& f(int k) const { return f_[k]; }

 private:
  double T_;
  int n_;
  double tau_;
  std::vector<Eigen::VectorXd> z_, dz_, ddz_, f_;
};

}  // namespace kvcrack
