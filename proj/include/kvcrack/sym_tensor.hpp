#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace kvcrack {

/// Symmetric 2x2 tensor (strain or stress at a quadrature point).
///
/// The Frobenius product counts the off-diagonal entry twice, so
/// `dot(a, b) = a.xx*b.xx + a.yy*b.yy + 2*a.xy*b.xy`.
struct SymTensor2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;

  constexpr SymTensor2() = default;
  constexpr SymTensor2(double xx_, double yy_, double xy_) : xx(xx_), yy(yy_), xy(xy_) {}

  static constexpr SymTensor2 diag(double a, double b) { return {a, b, 0.0}; }

  constexpr SymTensor2& operator+=(const SymTensor2& o) {
    xx += o.xx;
    yy += o.yy;
    xy += o.xy;
    return *this;
  }
  constexpr SymTensor2& operator-=(const SymTensor2& o) {
    xx -= o.xx;
    yy -= o.yy;
    xy -= o.xy;
    return *this;
  }
  constexpr SymTensor2& operator*=(double s) {
    xx *= s;
    yy *= s;
    xy *= s;
    return *this;
  }

  constexpr bool is_zero() const { return xx == 0.0 && yy == 0.0 && xy == 0.0; }

  /// Components in the orthonormal basis (xx, yy, sqrt(2) xy), in which the
  /// Frobenius product is the Euclidean one.
  Eigen::Vector3d to_orthonormal() const { return {xx, yy, std::sqrt(2.0) * xy}; }
  static SymTensor2 from_orthonormal(const Eigen::Vector3d& v) {
    return {v[0], v[1], v[2] / std::sqrt(2.0)};
  }
};

constexpr SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
constexpr SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
constexpr SymTensor2 operator-(const SymTensor2& a) { return {-a.xx, -a.yy, -a.xy}; }
constexpr SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
constexpr SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }

constexpr double dot(const SymTensor2& a, const SymTensor2& b) {
  return a.xx * b.xx + a.yy * b.yy + 2.0 * a.xy * b.xy;
}

/// Scaled so that tiny or huge components do not under- or overflow.
inline double norm(const SymTensor2& a) {
  const double m = std::max({std::abs(a.xx), std::abs(a.yy), std::abs(a.xy)});
  if (m == 0.0 || !std::isfinite(m)) return m;
  const SymTensor2 s{a.xx / m, a.yy / m, a.xy / m};
  return m * std::sqrt(dot(s, s));
}

}  // namespace kvcrack
