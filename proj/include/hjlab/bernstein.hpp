#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hjlab/exponents.hpp"
#include "hjlab/field.hpp"
#include "hjlab/solver.hpp"
#include "hjlab/spectral.hpp"

namespace hjlab {

/// g(s) = (2/(1+delta)) (1+s)^((1+delta)/2) and its first two derivatives.
struct GValues {
  double g;
  double g1;
  double g2;
};

GValues g_eval(double s, double delta);

/// One audited inequality lhs <= rhs.
struct InequalityAudit {
  std::string name;
  /// max over nodes of lhs - rhs (negative means slack everywhere).
  double max_signed_violation = -std::numeric_limits<double>::infinity();
  /// Nodes where lhs - rhs > 1e-12 + 1e-10 max(|lhs|, |rhs|).
  std::size_t violations = 0;
  std::size_t evaluated = 0;

  bool passed() const noexcept { return violations == 0; }
  void record(double lhs, double rhs);
};

struct PointwiseAudit {
  InequalityAudit g_root;          // g'(s) s^(1/2) <= (1+s)^(delta/2)
  InequalityAudit g_convexity;     // delta g'(s) <= g'(s) + 2 s g''(s)
  InequalityAudit cauchy_schwarz;  // (Lap u)^2 / d <= |D^2 u|^2
  InequalityAudit power_mean;      // (1+s)^gamma <= 2^(gamma-1) (1+s^gamma)

  std::array<const InequalityAudit*, 4> all() const {
    return {&g_root, &g_convexity, &cauchy_schwarz, &power_mean};
  }
  bool passed() const noexcept {
    return g_root.passed() && g_convexity.passed() && cauchy_schwarz.passed() && power_mean.passed();
  }
};

/// Records the two g inequalities and the power-mean bound at one value of s.
void audit_scalar_inequalities(double s, double delta, double gamma, PointwiseAudit& audit);

/// Evaluates the four pointwise inequalities of the Bernstein argument at
/// every node with s = |Du|^2.
PointwiseAudit pointwise_audit(const ScalarField& u, const Exponents& exps, const SpectrumWorkspace& ws);

struct IbpResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap = 0.0;
};

/// Both sides of the integration-by-parts identity obtained by testing the
/// equation with -2 d_j(g' d_j u w_k^beta), w = g(|Du|^2), w_k = (w - k)^+:
///
///   beta int w_k^(beta-1)|Dw_k|^2 + int (4g'' sum_j (Du.Du_xj)^2 + 2g'|D^2u|^2) w_k^beta
///     + int DH(Du).Dw_k w_k^beta  =  -2 int (f - lambda) div(g' Du w_k^beta).
///
/// Derivatives of w are taken by the chain rule from spectral Du and D^2u.
/// Requires k >= 1.
IbpResult ibp_identity_residual(const ErgodicSolution& sol, const ErgodicProblem& problem,
                                const Exponents& exps, double k, const SpectrumWorkspace& ws);

/// Sampled k -> (Y_k, |{1+|Du|^2 > k^(2/(1+delta))}|).
struct SuperlevelCurve {
  std::vector<double> k;
  std::vector<double> y;
  std::vector<double> omega_arg;
  Exponents exponents;

  /// max(0, Y^theta - Y) with theta the superlevel exponent.
  double excess(std::size_t i) const;
};

/// Y_k = int_Q (((1+|Du|^2)^((1+delta)/2) - k)^+)^(q gamma/(1+delta)) by the rectangle
/// rule, summed in node order.
SuperlevelCurve superlevel_curve(const VectorField& du, const Exponents& exps, std::span<const double> k_grid);
SuperlevelCurve superlevel_curve(const ErgodicSolution& sol, const Exponents& exps,
                                 std::span<const double> k_grid, const SpectrumWorkspace& ws);

/// count geometric points from k_min to k_max_factor * max (1+|Du|^2)^((1+delta)/2).
std::vector<double> default_k_grid(const VectorField& du, const Exponents& exps, double k_min = 1.0,
                                   double k_max_factor = 1.05, std::size_t count = 64);

/// F(Z) = Z^theta - Z on [0, 1].
struct Alternative {
  double theta;
  double z_star;
  double f_star;

  double F(double z) const;
  /// Z^-(omega) < Z* < Z^+(omega) with F(Z^+-) = omega; needs 0 <= omega < F*.
  std::pair<double, double> roots(double omega) const;
};

/// theta = (d-2)/d, d >= 3: Z* = ((d-2)/d)^(d/2).
Alternative f_alternative(int d);
/// Any theta in (0, 1): Z* = theta^(1/(1-theta)).
Alternative alternative_for_exponent(double theta);

/// (||Du||_1 / t* + 1)^((1+delta)/2).
double k_star(double du_l1, double t_star, double delta);

/// Running maximum of pooled (superlevel measure, excess) pairs.
struct OmegaEnvelope {
  std::vector<double> t;
  std::vector<double> e;
  std::vector<std::string> provenance;

  /// Envelope value at t: the largest excess among pairs with measure <= t.
  double at(double t_query) const;
};

OmegaEnvelope omega_envelope(std::span<const SuperlevelCurve> curves,
                             std::span<const std::string> provenance = {});

/// Norms entering the maximal-regularity estimate, measured against the
/// effective source f - lambda.
struct RegularityReport {
  double q = 0.0;
  double gamma = 0.0;
  double norm_lap_q = 0.0;
  double norm_gradpow_q = 0.0;
  double norm_du_l1 = 0.0;
  double norm_f_eff_q = 0.0;
  double norm_f_raw_q = 0.0;
  double m_emp = 0.0;
  double k_emp = 0.0;
};

RegularityReport regularity_report(const ErgodicSolution& sol, const ErgodicProblem& problem,
                                   const SpectrumWorkspace& ws);

}  // namespace hjlab
