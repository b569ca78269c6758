#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include "kvcrack/sym_tensor.hpp"

namespace kvcrack {

/// Regularised power law G_eps(xi) = (1 + eps_reg) |xi|^{p-2} xi.
///
/// The stress is recovered implicitly through G_eps(sigma) = e u + e u_dot, so
/// the quantity the time stepper evaluates is the inverse map
/// G_eps^{-1}(eta) = (1 + eps_reg)^{-1/(p-1)} |eta|^{p'-2} eta, which is the
/// gradient of the convex conjugate phi_eps^*. eps_reg = 0 gives the
/// unregularised Kelvin-Voigt law.
class ConstitutiveLaw {
 public:
  ConstitutiveLaw(double p, double eps_reg);

  double p() const { return p_; }
  double eps_reg() const { return eps_reg_; }
  /// Hoelder conjugate p' = p / (p - 1).
  double p_conj() const { return p_conj_; }
  /// Factor (1 + eps_reg)^{-1/(p-1)} of the inverse map.
  double inverse_scale() const { return inverse_scale_; }

  /// Same exponent with eps_reg = 0.
  ConstitutiveLaw unregularised() const { return {p_, 0.0}; }

  /// Radial profile g(r) = (1 + eps_reg) r^{p-1}, so G(xi) = g(|xi|) xi / |xi|.
  double radial(double r) const;
  double radial_slope(double r) const;

 private:
  double p_;
  double eps_reg_;
  double p_conj_;
  double inverse_scale_;
};

struct RootFindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RootFindOptions {
  /// Tolerance on the radial residual |g(r) - |eta||, relative to |eta|.
  double tolerance = 1e-14;
  int max_iterations = 200;
};

SymTensor2 g_apply(const ConstitutiveLaw& law, const SymTensor2& xi);
SymTensor2 g_inverse(const ConstitutiveLaw& law, const SymTensor2& eta);

/// Inverse through a bracketed bisection/Newton solve of the scalar equation
/// g(r) = |eta|. Independent of the closed form; used to cross-check it.
SymTensor2 g_inverse_rootfind(const ConstitutiveLaw& law, const SymTensor2& eta,
                              const RootFindOptions& options = {});

/// Solves g(r) = target for r >= 0 with g continuous, increasing, g(0) = 0.
double solve_radial(const std::function<double(double)>& g,
                    const std::function<double(double)>& slope, double target,
                    const RootFindOptions& options = {});

double phi(const ConstitutiveLaw& law, const SymTensor2& xi);
double phi_star(const ConstitutiveLaw& law, const SymTensor2& eta);

/// Derivative of g_inverse at eta in the orthonormal basis (xx, yy, sqrt2 xy).
///
/// The tangent is s (I + (p'-2) n n^T) with s = scale |eta|^{p'-2}. Its
/// eigenvalues degenerate at eta = 0 (to 0 or infinity), so |eta| is floored at
/// `min_norm` and both eigenvalues are floored at `eig_floor`.
Eigen::Matrix3d inverse_tangent(const ConstitutiveLaw& law, const SymTensor2& eta,
                                double min_norm, double eig_floor);

/// Candidate constants of the inverse growth bounds, from the closed form.
struct GrowthConstants {
  double c1 = 0.0;  // G^{-1}(eta).eta >= c1 |eta|^{p'} - c2
  double c2 = 0.0;
  double c3 = 0.0;  // |G^{-1}(eta)| <= c3 (1 + |eta|^{p'-1})
  double c4 = 0.0;  // 0 <= phi*(eta) <= c4 (1 + |eta|^{p'})
};

GrowthConstants derive_growth_constants(const ConstitutiveLaw& law);

struct GrowthReport {
  bool pass = true;
  /// Smallest margin over all bounds and samples, relative to the bound scale.
  double worst_margin = 0.0;
  std::string worst_bound;
  SymTensor2 worst_sample;
  std::size_t samples = 0;
};

GrowthReport check_growth_bounds(const ConstitutiveLaw& law, std::span<const SymTensor2> samples,
                                 const GrowthConstants& constants);
GrowthReport check_growth_bounds(const ConstitutiveLaw& law, std::span<const SymTensor2> samples);

}  // namespace kvcrack
