#include "kvcrack/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kvcrack {

ConstitutiveLaw::ConstitutiveLaw(double p, double eps_reg) : p_(p), eps_reg_(eps_reg) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("power-law exponent must satisfy 1 < p < inf");
  }
  if (!(eps_reg >= 0.0) || !std::isfinite(eps_reg)) {
    throw std::invalid_argument("regularisation weight must be finite and >= 0");
  }
  p_conj_ = p / (p - 1.0);
  inverse_scale_ = std::pow(1.0 + eps_reg, -1.0 / (p - 1.0));
}

double ConstitutiveLaw::radial(double r) const { return (1.0 + eps_reg_) * std::pow(r, p_ - 1.0); }

double ConstitutiveLaw::radial_slope(double r) const {
  return (1.0 + eps_reg_) * (p_ - 1.0) * std::pow(r, p_ - 2.0);
}

// |xi|^{p-2} xi is evaluated as |xi|^{p-1} (xi / |xi|) so that p < 2 does not
// overflow near the origin.
SymTensor2 g_apply(const ConstitutiveLaw& law, const SymTensor2& xi) {
  const double r = norm(xi);
  if (r == 0.0) return {};
  return ((1.0 + law.eps_reg()) * std::pow(r, law.p() - 1.0) / r) * xi;
}

SymTensor2 g_inverse(const ConstitutiveLaw& law, const SymTensor2& eta) {
  const double r = norm(eta);
  if (r == 0.0) return {};
  return (law.inverse_scale() * std::pow(r, law.p_conj() - 1.0) / r) * eta;
}

double solve_radial(const std::function<double(double)>& g,
                    const std::function<double(double)>& slope, double target,
                    const RootFindOptions& options) {
  if (target <= 0.0) return 0.0;
  const double tol = options.tolerance * target;

  double lo = 0.0;
  double hi = 1.0;
  int it = 0;
  while (g(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++it > 2 * options.max_iterations) {
      throw RootFindError("radial inverse: could not bracket the root");
    }
  }

  // Coarse bisection first, then safeguarded Newton inside the bracket.
  double r = 0.5 * (lo + hi);
  for (int i = 0; i < options.max_iterations; ++i) {
    const double res = g(r) - target;
    if (std::abs(res) <= tol) return r;
    if (res > 0.0) {
      hi = r;
    } else {
      lo = r;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return r;

    double next = 0.5 * (lo + hi);
    if (i >= 8) {
      const double d = slope(r);
      if (d > 0.0 && std::isfinite(d)) {
        const double newton = r - res / d;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    r = next;
  }
  throw RootFindError("radial inverse: no convergence after " +
                      std::to_string(options.max_iterations) + " iterations");
}

SymTensor2 g_inverse_rootfind(const ConstitutiveLaw& law, const SymTensor2& eta,
                              const RootFindOptions& options) {
  const double target = norm(eta);
  if (target == 0.0) return {};
  const double r = solve_radial([&](double s) { return law.radial(s); },
                                [&](double s) { return law.radial_slope(s); }, target, options);
  return (r / target) * eta;
}

double phi(const ConstitutiveLaw& law, const SymTensor2& xi) {
  return (1.0 + law.eps_reg()) * std::pow(norm(xi), law.p()) / law.p();
}

double phi_star(const ConstitutiveLaw& law, const SymTensor2& eta) {
  return law.inverse_scale() * std::pow(norm(eta), law.p_conj()) / law.p_conj();
}

Eigen::Matrix3d inverse_tangent(const ConstitutiveLaw& law, const SymTensor2& eta,
                                double min_norm, double eig_floor) {
  const double q = law.p_conj();
  const double r_true = norm(eta);
  const double r = std::max(r_true, min_norm);
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  if (r_true > 0.0) n = eta.to_orthonormal() / r_true;

  const double s = law.inverse_scale() * std::pow(r, q - 2.0);
  const double tangential = std::max(s, eig_floor);
  const double radial = std::max(s * (q - 1.0), eig_floor);
  if (r_true == 0.0) {
    // No preferred direction at the origin: use the isotropic average.
    return std::max(s * (q + 1.0) / 3.0, eig_floor) * Eigen::Matrix3d::Identity();
  }
  const Eigen::Matrix3d nn = n * n.transpose();
  return tangential * (Eigen::Matrix3d::Identity() - nn) + radial * nn;
}

GrowthConstants derive_growth_constants(const ConstitutiveLaw& law) {
  GrowthConstants c;
  c.c1 = law.inverse_scale();
  c.c2 = 0.0;
  c.c3 = law.inverse_scale();
  c.c4 = law.inverse_scale() / law.p_conj();
  return c;
}

GrowthReport check_growth_bounds(const ConstitutiveLaw& law, std::span<const SymTensor2> samples,
                                 const GrowthConstants& c) {
  if (samples.empty()) throw std::invalid_argument("check_growth_bounds: no samples");
  constexpr double kRounding = 1e-12;
  const double q = law.p_conj();

  GrowthReport report;
  report.samples = samples.size();
  report.worst_margin = std::numeric_limits<double>::infinity();

  auto record = [&](const char* name, double lhs_minus_rhs, double scale, const SymTensor2& s) {
    const double margin = lhs_minus_rhs / std::max(scale, 1.0);
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_bound = name;
      report.worst_sample = s;
    }
    if (margin < -kRounding) report.pass = false;
  };

  for (const SymTensor2& eta : samples) {
    const double r = norm(eta);
    const SymTensor2 xi = g_inverse(law, eta);
    const double work = dot(xi, eta);
    const double conj = phi_star(law, eta);

    const double lower = c.c1 * std::pow(r, q) - c.c2;
    record("coercivity", work - lower, std::abs(work) + std::abs(lower), eta);

    const double upper = c.c3 * (1.0 + std::pow(r, q - 1.0));
    record("growth", upper - norm(xi), upper, eta);

    record("conjugate_nonnegative", conj, std::abs(conj), eta);

    const double conj_upper = c.c4 * (1.0 + std::pow(r, q));
    record("conjugate_growth", conj_upper - conj, conj_upper, eta);
  }
  return report;
}

GrowthReport check_growth_bounds(const ConstitutiveLaw& law, std::span<const SymTensor2> samples) {
  return check_growth_bounds(law, samples, derive_growth_constants(law));
}

}  // namespace kvcrack
