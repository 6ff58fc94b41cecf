#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

/// Exponent bookkeeping of the superlevel-set estimate, derived from (gamma, q, d).
///
/// Real is double for the numerics and an exact rational type in the
/// identity checks; every step is a field operation so the identities below
/// hold exactly in rational arithmetic.
template <class Real>
struct BasicExponents {
  Real gamma;
  Real q;
  int d = 0;
  Real delta;
  Real delta_max;
  /// Lebesgue exponent of the Hoelder/Young step; the fallback value when used.
  Real p;
  /// 2(gamma-1)/gamma + (d-2)q/d, before any fallback.
  Real p_formula;
  Real beta;
  Real eta;
  bool used_fallback = false;
  /// Exponent theta on the left of Y^theta <= Y + omega: (d-2)/d for d >= 3.
  /// For d <= 2 every Sobolev exponent is available; theta is then taken as
  /// (beta+1)(1+delta)/(gamma q), the ratio the d >= 3 bookkeeping produces.
  Real superlevel_exponent;
};

using Exponents = BasicExponents<double>;

namespace detail {

template <class Real>
std::string show(const Real& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

/// Derives (delta, p, beta, eta) for admissible (gamma, q, d).
///
/// p = (2/d)(d/gamma') + ((d-2)/d) q when d >= 3 and that value exceeds 2;
/// otherwise the midpoint (2 + q)/2 of (2, q). delta must keep beta > 1,
/// delta p q/(q - p) < 1 and delta < 1; the default is min(delta_max/2, 1/10).
template <class Real>
BasicExponents<Real> derive_exponents(const Real& gamma, const Real& q, int d,
                                      const std::optional<Real>& delta = std::nullopt) {
  const Real one(1), two(2);
  if (d < 1) throw DomainError("dimension must be >= 1");
  if (!(gamma > one)) throw DomainError("gamma must exceed 1, got " + detail::show(gamma));
  const Real critical = Real(d) * (gamma - one) / gamma;
  if (!(q > one)) throw AdmissibilityError("q > 1 is violated: q = " + detail::show(q));
  if (!(q > critical)) {
    throw AdmissibilityError("q > d(gamma-1)/gamma is violated: q = " + detail::show(q) +
                             ", d(gamma-1)/gamma = " + detail::show(critical));
  }
  if (!(q > two)) throw AdmissibilityError("q > 2 is violated: q = " + detail::show(q));

  BasicExponents<Real> e;
  e.gamma = gamma;
  e.q = q;
  e.d = d;
  e.p_formula = two * (gamma - one) / gamma + Real(d - 2) * q / Real(d);
  if (d >= 3 && e.p_formula > two) {
    e.p = e.p_formula;
    e.used_fallback = false;
  } else {
    e.p = (two + q) / two;
    e.used_fallback = true;
  }

  const Real beta_bound = gamma * (e.p - two) / two;   // beta > 1  <=>  delta < this
  const Real young_bound = (q - e.p) / (e.p * q);      // delta p q/(q-p) < 1
  e.delta_max = std::min(one, std::min(beta_bound, young_bound));

  if (delta) {
    if (!(*delta > Real(0)) || !(*delta < e.delta_max)) {
      throw DomainError("delta must lie in (0, " + detail::show(e.delta_max) + "), got " +
                        detail::show(*delta));
    }
    e.delta = *delta;
  } else {
    e.delta = std::min(Real(e.delta_max / two), Real(one / Real(10)));
  }

  e.beta = (gamma * (e.p - two) + one - e.delta) / (one + e.delta);
  e.eta = (two * gamma + e.delta - one) / (one + e.delta);
  if (d >= 3) {
    e.superlevel_exponent = Real(d - 2) / Real(d);
  } else {
    e.superlevel_exponent = (e.beta + one) * (one + e.delta) / (gamma * q);
  }
  return e;
}

/// Left minus right side of (2gamma+delta-1)/(1+delta) = ((delta-1)/(1+delta)) p/(p-2) + beta 2/(p-2).
template <class Real>
Real eta_split_defect(const BasicExponents<Real>& e) {
  const Real one(1), two(2);
  return e.eta - ((e.delta - one) / (one + e.delta) * e.p / (e.p - two) + e.beta * two / (e.p - two));
}

/// beta + eta - p gamma/(1+delta).
template <class Real>
Real beta_eta_defect(const BasicExponents<Real>& e) {
  return e.beta + e.eta - e.p * e.gamma / (Real(1) + e.delta);
}

/// (beta+1) d/(d-2) - gamma q/(1+delta); zero without fallback, positive with it (d >= 3).
template <class Real>
Real sobolev_match_defect(const BasicExponents<Real>& e) {
  if (e.d < 3) throw DomainError("the Sobolev exponent d/(d-2) needs d >= 3");
  return (e.beta + Real(1)) * Real(e.d) / Real(e.d - 2) - e.gamma * e.q / (Real(1) + e.delta);
}

}  // namespace hjlab
