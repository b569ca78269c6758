#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "kvcrack/constitutive.hpp"
#include "kvcrack/mesh.hpp"

namespace kvcrack {

using StrainMatrix = Eigen::Matrix<double, 3, 6>;

/// Precomputed P1 element data for a (side-resolved) mesh.
///
/// `strain_op(t)` maps the six local DOFs [u0x, u0y, u1x, u1y, u2x, u2y] to
/// the strain in the orthonormal basis (xx, yy, sqrt2 xy). The H inner product
/// uses the row-sum lumped mass, area/3 per vertex and element.
class FemOperators {
 public:
  explicit FemOperators(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::size_t num_elements() const { return area_.size(); }
  double area(std::size_t t) const { return area_[t]; }
  const StrainMatrix& strain_op(std::size_t t) const { return strain_op_[t]; }
  const std::array<int, 3>& triangle(std::size_t t) const { return mesh_->triangles[t]; }
  /// Lumped mass per expanded DOF.
  const Eigen::VectorXd& lumped_mass() const { return mass_; }

  SymTensor2 strain(std::size_t t, const Eigen::VectorXd& u) const;
  std::vector<SymTensor2> strains(const Eigen::VectorXd& u) const;

  /// (a, b)_H with the lumped mass.
  double h_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double h_norm(const Eigen::VectorXd& a) const;
  /// Lumped-quadrature ||u||_q^q of a nodal vector field.
  double lq_power(const Eigen::VectorXd& u, double q) const;
  /// sum_t area_t |tensor_t|^q, exact for piecewise-constant tensors.
  double tensor_lq_power(const std::vector<SymTensor2>& field, double q) const;
  /// ||u||_V = (||u||_{p'}^{p'} + ||e u||_{p'}^{p'})^{1/p'}.
  double v_norm(const Eigen::VectorXd& u, double p_conj) const;
  /// sum_t area_t a_t . b_t
  double tensor_inner(const std::vector<SymTensor2>& a, const std::vector<SymTensor2>& b) const;

 private:
  const Mesh* mesh_;
  std::vector<double> area_;
  std::vector<StrainMatrix> strain_op_;
  Eigen::VectorXd mass_;
};

}  // namespace kvcrack
