#pragma once

// Reference solvers for the tests. They share no assembly code with the
// library: geometry, strains and the time recursion are written out again.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "kvcrack/loads.hpp"
#include "kvcrack/mesh.hpp"

namespace oracle {

/// Exact time average of a profile over [a, b].
inline double time_average(const kvcrack::TimeProfile& tp, double a, double b) {
  using F = kvcrack::TimeProfile::Family;
  switch (tp.family) {
    case F::Constant:
      return tp.coeffs[0];
    case F::Polynomial: {
      auto prim = [&](double t) {
        return tp.coeffs[0] * t + tp.coeffs[1] * t * t / 2 + tp.coeffs[2] * t * t * t / 3;
      };
      return (prim(b) - prim(a)) / (b - a);
    }
    case F::Sinusoidal:
      return tp.amplitude * (std::cos(tp.omega * a + tp.phase) - std::cos(tp.omega * b + tp.phase)) /
             (tp.omega * (b - a));
  }
  return 0.0;
}

inline double spatial(const kvcrack::LoadTerm& term, double x, double y) {
  switch (term.space) {
    case kvcrack::SpatialProfile::Uniform:
      return 1.0;
    case kvcrack::SpatialProfile::LinearX:
      return x - term.offset;
    case kvcrack::SpatialProfile::LinearY:
      return y - term.offset;
  }
  return 0.0;
}

/// Nodal values of a load field with the time factor supplied by `time_fn`.
inline Eigen::VectorXd nodal(const kvcrack::Mesh& mesh, const kvcrack::LoadField& field,
                             const std::function<double(const kvcrack::TimeProfile&)>& time_fn) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * mesh.vertices.size());
  for (const auto& term : field.terms()) {
    const double s = time_fn(term.time);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const double w = s * spatial(term, mesh.vertices[i].x, mesh.vertices[i].y);
      out[2 * i] += w * term.direction[0];
      out[2 * i + 1] += w * term.direction[1];
    }
  }
  return out;
}

/// Implicit linear Kelvin-Voigt scheme on a plain mesh (no ties),
///   M (u_k - 2 u_{k-1} + u_{k-2}) / tau^2 + s K (u_k + (u_k - u_{k-1}) / tau) = M f_k
/// on free rows and u_k = z(t_k) on Dirichlet vertices, with u_{-1} = u_0 - tau u_1.
/// K is the dense stiffness of (e u, e w) and M the lumped mass.
class LinearKv {
 public:
  LinearKv(const kvcrack::Mesh& mesh, std::vector<bool> dirichlet, double stress_scale)
      : mesh_(mesh), dirichlet_(std::move(dirichlet)), scale_(stress_scale) {
    const int nd = static_cast<int>(2 * mesh.vertices.size());
    K_ = Eigen::MatrixXd::Zero(nd, nd);
    m_ = Eigen::VectorXd::Zero(nd);
    for (const auto& tri : mesh.triangles) {
      const auto& P = mesh.vertices;
      double b[3], c[3];
      for (int i = 0; i < 3; ++i) {
        const auto& pj = P[tri[(i + 1) % 3]];
        const auto& pk = P[tri[(i + 2) % 3]];
        b[i] = pj.y - pk.y;
        c[i] = pk.x - pj.x;
      }
      const double twice_area = P[tri[1]].x * P[tri[2]].y - P[tri[2]].x * P[tri[1]].y -
                                P[tri[0]].x * P[tri[2]].y + P[tri[2]].x * P[tri[0]].y +
                                P[tri[0]].x * P[tri[1]].y - P[tri[1]].x * P[tri[0]].y;
      const double area = twice_area / 2;
      // strain of a basis field as the full 2x2 matrix
      auto strain = [&](int i, int comp) {
        Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
        g(comp, 0) = b[i] / twice_area;
        g(comp, 1) = c[i] / twice_area;
        return Eigen::Matrix2d(0.5 * (g + g.transpose()));
      };
      for (int i = 0; i < 3; ++i) {
        m_[2 * tri[i]] += area / 3;
        m_[2 * tri[i] + 1] += area / 3;
        for (int a = 0; a < 2; ++a) {
          for (int j = 0; j < 3; ++j) {
            for (int d = 0; d < 2; ++d) {
              K_(2 * tri[i] + a, 2 * tri[j] + d) +=
                  area * strain(i, a).cwiseProduct(strain(j, d)).sum();
            }
          }
        }
      }
    }
  }

  const Eigen::MatrixXd& stiffness() const { return K_; }
  const Eigen::VectorXd& mass() const { return m_; }

  /// Returns u_0 .. u_n.
  std::vector<Eigen::VectorXd> solve(const kvcrack::LoadField& f, const kvcrack::LoadField& z,
                                     const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                                     double T, int n) const {
    const double tau = T / n;
    const int nd = static_cast<int>(m_.size());
    std::vector<int> free;
    for (int i = 0; i < nd; ++i)
      if (!dirichlet_[i / 2]) free.push_back(i);
    const int nf = static_cast<int>(free.size());

    const double c = 1.0 + 1.0 / tau;
    Eigen::MatrixXd A(nf, nf);
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nf; ++j)
        A(i, j) = scale_ * c * K_(free[i], free[j]) + (i == j ? m_[free[i]] / (tau * tau) : 0.0);
    const Eigen::LDLT<Eigen::MatrixXd> lu(A);

    std::vector<Eigen::VectorXd> u{u0};
    Eigen::VectorXd before = u0 - tau * u1;
    for (int k = 1; k <= n; ++k) {
      const double a = (k - 1) * tau, bnd = k * tau;
      const Eigen::VectorXd fk =
          nodal(mesh_, f, [&](const kvcrack::TimeProfile& tp) { return time_average(tp, a, bnd); });
      const Eigen::VectorXd zk =
          nodal(mesh_, z, [&](const kvcrack::TimeProfile& tp) { return tp.value(bnd); });
      Eigen::VectorXd uk = Eigen::VectorXd::Zero(nd);
      for (int i = 0; i < nd; ++i)
        if (dirichlet_[i / 2]) uk[i] = zk[i];
      const Eigen::VectorXd& prev = u.back();
      // everything except the free-free block moved to the right
      const Eigen::VectorXd full_rhs =
          m_.cwiseProduct(fk + (2 * prev - before) / (tau * tau)) + scale_ / tau * (K_ * prev) -
          scale_ * c * (K_ * uk);
      Eigen::VectorXd rhs(nf);
      for (int i = 0; i < nf; ++i) rhs[i] = full_rhs[free[i]];
      const Eigen::VectorXd x = lu.solve(rhs);
      for (int i = 0; i < nf; ++i) uk[free[i]] = x[i];
      before = prev;
      u.push_back(uk);
    }
    return u;
  }

 private:
  const kvcrack::Mesh& mesh_;
  std::vector<bool> dirichlet_;
  double scale_;
  Eigen::MatrixXd K_;
  Eigen::VectorXd m_;
};

/// Golden-section search for the minimiser of a unimodal function on [a, b].
inline long double golden_min(const std::function<long double(long double)>& f, long double a,
                              long double b, long double tol) {
  const long double r = (std::sqrt(5.0L) - 1) / 2;
  long double x1 = b - r * (b - a), x2 = a + r * (b - a);
  long double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return (a + b) / 2;
}

/// Minimiser of a convex function of two variables by nested golden sections
/// on the box centre +- half_width.
inline std::array<long double, 2> golden_min2(
    const std::function<long double(long double, long double)>& f,
    std::array<long double, 2> centre, long double half_width, long double tol) {
  auto inner = [&](long double x) {
    return golden_min([&](long double y) { return f(x, y); }, centre[1] - half_width,
                      centre[1] + half_width, tol);
  };
  const long double x = golden_min([&](long double xv) { return f(xv, inner(xv)); },
                                   centre[0] - half_width, centre[0] + half_width, tol);
  return {x, inner(x)};
}

}  // namespace oracle
