#include "kvcrack/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace kvcrack {

FemOperators::FemOperators(const Mesh& mesh) : mesh_(&mesh) {
  const std::size_t ne = mesh.num_triangles();
  area_.resize(ne);
  strain_op_.resize(ne);
  mass_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_dofs()));
  const double r2 = std::sqrt(2.0) / 2.0;
  for (std::size_t t = 0; t < ne; ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    area_[t] = g.area;
    StrainMatrix& b = strain_op_[t];
    b.setZero();
    for (int i = 0; i < 3; ++i) {
      b(0, 2 * i) = g.dndx[i];
      b(1, 2 * i + 1) = g.dndy[i];
      b(2, 2 * i) = r2 * g.dndy[i];
      b(2, 2 * i + 1) = r2 * g.dndx[i];
    }
    for (int v : mesh.triangles[t]) {
      mass_[2 * v] += g.area / 3.0;
      mass_[2 * v + 1] += g.area / 3.0;
    }
  }
}

SymTensor2 FemOperators::strain(std::size_t t, const Eigen::VectorXd& u) const {
  const auto& tri = mesh_->triangles[t];
  Eigen::Matrix<double, 6, 1> local;
  for (int i = 0; i < 3; ++i) {
    local[2 * i] = u[2 * tri[i]];
    local[2 * i + 1] = u[2 * tri[i] + 1];
  }
  return SymTensor2::from_orthonormal(strain_op_[t] * local);
}

std::vector<SymTensor2> FemOperators::strains(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != mesh_->num_dofs()) {
    throw std::invalid_argument("nodal field size does not match the mesh");
  }
  std::vector<SymTensor2> out(num_elements());
  for (std::size_t t = 0; t < num_elements(); ++t) out[t] = strain(t, u);
  return out;
}

double FemOperators::h_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return (a.array() * mass_.array() * b.array()).sum();
}

double FemOperators::h_norm(const Eigen::VectorXd& a) const { return std::sqrt(h_inner(a, a)); }

double FemOperators::lq_power(const Eigen::VectorXd& u, double q) const {
  double sum = 0.0;
  for (Eigen::Index v = 0; v < u.size() / 2; ++v) {
    const double m = mass_[2 * v];
    if (m == 0.0) continue;
    sum += m * std::pow(std::hypot(u[2 * v], u[2 * v + 1]), q);
  }
  return sum;
}

double FemOperators::tensor_lq_power(const std::vector<SymTensor2>& field, double q) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < field.size(); ++t) sum += area_[t] * std::pow(norm(field[t]), q);
  return sum;
}

double FemOperators::v_norm(const Eigen::VectorXd& u, double p_conj) const {
  return std::pow(lq_power(u, p_conj) + tensor_lq_power(strains(u), p_conj), 1.0 / p_conj);
}

double FemOperators::tensor_inner(const std::vector<SymTensor2>& a,
                                  const std::vector<SymTensor2>& b) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) sum += area_[t] * dot(a[t], b[t]);
  return sum;
}

}  // namespace kvcrack
