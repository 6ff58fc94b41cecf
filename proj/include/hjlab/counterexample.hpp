#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hjlab/errors.hpp"

namespace hjlab {

/// chi(t) = 0 for t <= 1, psi(t - 1) on (1, 2), 1 for t >= 2 with
/// psi(s) = E(s) / (E(s) + E(1 - s)), E(s) = exp(-1/s).
///
/// The sharp variant replaces chi by the indicator of [1, inf); it has no
/// derivative and is only usable for the gradient-power norm.
class CutoffProfile {
 public:
  enum class Kind { smooth, sharp };

  explicit CutoffProfile(Kind kind = Kind::smooth) : kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  double chi(double t) const;
  /// Throws DomainError for the sharp variant.
  double chi_prime(double t) const;

  static double psi(double s);
  static double psi_prime(double s);

 private:
  Kind kind_;
};

/// Radial family v_eps(r) = c int_r^(1/2) s^(-1/(gamma-1)) chi(s/eps) ds on B_(1/2).
struct RadialProfile {
  double gamma;
  int d;
  double eps;
  double c;
  CutoffProfile cutoff;
};

/// c = -(d - 1 - 1/(gamma-1))^(1/(gamma-1)); needs gamma > d/(d-1).
double c_constant(double gamma, int d);

/// d(gamma-1)/gamma.
double critical_q(double gamma, int d);

/// Surface area of the unit sphere in R^d, d in {2, 3, 4}.
double sphere_area(int d);

/// Validates gamma > d/(d-1), d in {2, 3, 4} and eps in (0, 1/4].
RadialProfile make_profile(double gamma, int d, double eps,
                           CutoffProfile::Kind kind = CutoffProfile::Kind::smooth);

struct ProfileValues {
  double v;
  double v1;
  double v2;
  double f;
};

/// v by adaptive quadrature (relative tolerance 1e-11), v', v'' and f in closed form.
ProfileValues profile_eval(const RadialProfile& prof, double r);

/// max over samples of |-(v'' + (d-1)v'/r) + |v'|^gamma - f| / (1 + scale), where
/// scale is the largest magnitude among the four terms at that radius.
double radial_residual(const RadialProfile& prof, std::span<const double> r_samples);

struct QuadratureOptions {
  double rel_tol = 1e-9;
  unsigned max_depth = 20;
};

struct BallNorms {
  double norm_f;
  double norm_grad_pow;
  /// Largest error estimate relative to the integral it came with.
  double achieved_tol;
};

/// L^q(B_(1/2)) norms of f_eps and |Dv_eps|^gamma. The sharp cutoff yields
/// norm_f = NaN since f_eps is then a measure.
BallNorms ball_norms(const RadialProfile& prof, double q, const QuadratureOptions& opts = {});

struct NormRow {
  double eps;
  double q;
  double norm_f;
  double norm_grad_pow;
  double quad_tol;
};

struct NormTable {
  std::vector<NormRow> rows;
};

/// Rows ordered by eps descending; rows are computed in parallel when threads > 1.
NormTable norm_table(double gamma, int d, double q, std::span<const double> eps_list,
                     const QuadratureOptions& opts = {}, unsigned threads = 1);

struct DivergenceFit {
  double slope;
  double intercept;
  double max_relative_residual;
};

/// Least squares of norm_grad_pow^q against ln(1/eps); needs >= 4 distinct eps at one q.
DivergenceFit divergence_fit(const NormTable& table);

std::string norm_table_csv(const NormTable& table, const DivergenceFit* fit, double radial_residual_max);

}  // namespace hjlab
