#include "hjlab/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hjlab {

GValues g_eval(double s, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1), got " + std::to_string(delta));
  }
  if (!(s >= 0.0)) throw DomainError("g is evaluated at s >= 0, got " + std::to_string(s));
  const double base = 1.0 + s;
  GValues v;
  v.g = 2.0 / (1.0 + delta) * std::pow(base, 0.5 * (1.0 + delta));
  v.g1 = std::pow(base, 0.5 * (delta - 1.0));
  v.g2 = 0.5 * (delta - 1.0) * std::pow(base, 0.5 * (delta - 3.0));
  return v;
}

void InequalityAudit::record(double lhs, double rhs) {
  const double diff = lhs - rhs;
  max_signed_violation = std::max(max_signed_violation, diff);
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (!(diff <= 1e-12 + 1e-10 * scale)) ++violations;
  ++evaluated;
}

namespace {

PointwiseAudit named_audit() {
  PointwiseAudit a;
  a.g_root.name = "g'(s) s^(1/2) <= (1+s)^(delta/2)";
  a.g_convexity.name = "g'(s) + 2 s g''(s) >= delta g'(s)";
  a.cauchy_schwarz.name = "|D^2u|^2 >= (Lap u)^2 / d";
  a.power_mean.name = "(1+s)^gamma <= 2^(gamma-1) (1+s^gamma)";
  return a;
}

}  // namespace

void audit_scalar_inequalities(double s, double delta, double gamma, PointwiseAudit& audit) {
  const GValues g = g_eval(s, delta);
  audit.g_root.record(g.g1 * std::sqrt(s), std::pow(1.0 + s, 0.5 * delta));
  audit.g_convexity.record(delta * g.g1, g.g1 + 2.0 * s * g.g2);
  audit.power_mean.record(std::pow(1.0 + s, gamma), std::pow(2.0, gamma - 1.0) * (1.0 + std::pow(s, gamma)));
}

PointwiseAudit pointwise_audit(const ScalarField& u, const Exponents& exps, const SpectrumWorkspace& ws) {
  PointwiseAudit audit = named_audit();
  const VectorField du = gradient(u, ws);
  const HessianField d2u = hessian(u, ws);
  const ScalarField lap = d2u.trace();
  const double d = u.grid().dim();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = du.norm_squared(i);
    audit_scalar_inequalities(s, exps.delta, exps.gamma, audit);
    audit.cauchy_schwarz.record(lap[i] * lap[i] / d, d2u.frobenius_squared(i));
  }
  return audit;
}

IbpResult ibp_identity_residual(const ErgodicSolution& sol, const ErgodicProblem& problem,
                                const Exponents& exps, double k, const SpectrumWorkspace& ws) {
  if (!(k >= 1.0)) throw DomainError("superlevel threshold k must be >= 1, got " + std::to_string(k));
  const GridSpec& grid = sol.u.grid();
  const int d = grid.dim();
  const VectorField du = gradient(sol.u, ws);
  const HessianField d2u = hessian(sol.u, ws);
  const double beta = exps.beta;

  double lhs = 0.0;
  double rhs = 0.0;
  std::array<double, 3> p{}, hp{}, dh{};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = du.norm_squared(i);
    const GValues g = g_eval(s, exps.delta);
    const double wk = g.g - k;
    if (!(wk > 0.0)) continue;

    for (int a = 0; a < d; ++a) p[a] = du[a][i];
    // hp = D^2u Du, so (hp)_j = Du . Du_{x_j} and Dw = 2 g' hp.
    double hp2 = 0.0, lap = 0.0, du_hp = 0.0;
    for (int j = 0; j < d; ++j) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) acc += d2u(j, a)[i] * p[a];
      hp[j] = acc;
      hp2 += acc * acc;
      du_hp += p[j] * acc;
      lap += d2u(j, j)[i];
    }
    problem.H.gradient(std::span<const double>(p.data(), static_cast<std::size_t>(d)),
                       std::span<double>(dh.data(), static_cast<std::size_t>(d)));
    double dh_dw = 0.0;
    for (int j = 0; j < d; ++j) dh_dw += dh[j] * 2.0 * g.g1 * hp[j];

    const double wk_b = std::pow(wk, beta);
    const double wk_b1 = std::pow(wk, beta - 1.0);
    const double dw2 = 4.0 * g.g1 * g.g1 * hp2;

    lhs += beta * wk_b1 * dw2 + (4.0 * g.g2 * hp2 + 2.0 * g.g1 * d2u.frobenius_squared(i)) * wk_b +
           dh_dw * wk_b;

    // div(g' Du w_k^beta) = 2g'' Du.(D^2u Du) w_k^beta + g' Lap u w_k^beta + beta g' w_k^(beta-1) Du.Dw
    const double du_dw = 2.0 * g.g1 * du_hp;
    const double div = 2.0 * g.g2 * du_hp * wk_b + g.g1 * lap * wk_b + beta * g.g1 * wk_b1 * du_dw;
    rhs += -2.0 * (problem.f[i] - sol.lambda) * div;
  }
  const double cell = grid.cell_volume();
  IbpResult r;
  r.lhs = cell * lhs;
  r.rhs = cell * rhs;
  r.relative_gap = std::abs(r.lhs - r.rhs) / std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
  return r;
}

double SuperlevelCurve::excess(std::size_t i) const {
  const double yk = y.at(i);
  return std::max(0.0, std::pow(yk, exponents.superlevel_exponent) - yk);
}

SuperlevelCurve superlevel_curve(const VectorField& du, const Exponents& exps, std::span<const double> k_grid) {
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] >= 1.0)) throw DomainError("k-grid values must be >= 1");
    if (i > 0 && !(k_grid[i] > k_grid[i - 1])) throw DomainError("k-grid must be strictly increasing");
  }
  const GridSpec& grid = du.grid();
  const double half_power = 0.5 * (1.0 + exps.delta);
  const double y_power = exps.q * exps.gamma / (1.0 + exps.delta);
  const double cell = grid.cell_volume();

  std::vector<double> w(grid.size());
  std::vector<double> one_plus_s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    one_plus_s[i] = 1.0 + du.norm_squared(i);
    w[i] = std::pow(one_plus_s[i], half_power);
  }
  const ScalarField level(grid, one_plus_s);

  SuperlevelCurve curve;
  curve.exponents = exps;
  for (double k : k_grid) {
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += std::pow(std::max(w[i] - k, 0.0), y_power);
    curve.k.push_back(k);
    curve.y.push_back(cell * sum);
    curve.omega_arg.push_back(superlevel_measure(level, std::pow(k, 2.0 / (1.0 + exps.delta))));
  }
  return curve;
}

SuperlevelCurve superlevel_curve(const ErgodicSolution& sol, const Exponents& exps,
                                 std::span<const double> k_grid, const SpectrumWorkspace& ws) {
  return superlevel_curve(gradient(sol.u, ws), exps, k_grid);
}

std::vector<double> default_k_grid(const VectorField& du, const Exponents& exps, double k_min,
                                   double k_max_factor, std::size_t count) {
  if (!(k_min >= 1.0)) throw DomainError("k_min must be >= 1");
  if (count < 2) throw DomainError("k-grid needs at least two points");
  double w_max = 1.0;
  for (std::size_t i = 0; i < du.grid().size(); ++i) {
    w_max = std::max(w_max, std::pow(1.0 + du.norm_squared(i), 0.5 * (1.0 + exps.delta)));
  }
  double k_max = k_max_factor * w_max;
  if (!(k_max > k_min)) k_max = k_min * k_max_factor;
  if (!(k_max > k_min)) throw DomainError("k-grid upper end must exceed k_min");
  std::vector<double> grid(count);
  const double ratio = std::log(k_max / k_min);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = k_min * std::exp(ratio * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  grid.front() = k_min;
  return grid;
}

double Alternative::F(double z) const { return std::pow(z, theta) - z; }

std::pair<double, double> Alternative::roots(double omega) const {
  if (!(omega >= 0.0)) throw DomainError("omega must be nonnegative");
  if (!(omega < f_star)) {
    throw DomainError("F(Z) = omega has no roots for omega >= F* = " + std::to_string(f_star));
  }
  if (omega == 0.0) return {0.0, 1.0};
  // Bisect to adjacent doubles; F is increasing on [0, Z*] and decreasing on [Z*, 1].
  auto bisect = [&](double lo, double hi, bool increasing) {
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const bool below = F(mid) < omega;
      if (below == increasing) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return std::abs(F(lo) - omega) <= std::abs(F(hi) - omega) ? lo : hi;
  };
  return {bisect(0.0, z_star, true), bisect(z_star, 1.0, false)};
}

Alternative alternative_for_exponent(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw DomainError("superlevel exponent must lie in (0, 1)");
  Alternative a;
  a.theta = theta;
  a.z_star = std::pow(theta, 1.0 / (1.0 - theta));
  a.f_star = a.F(a.z_star);
  return a;
}

Alternative f_alternative(int d) {
  if (d < 3) throw DomainError("the alternative F(Z) = Z^((d-2)/d) - Z needs d >= 3");
  Alternative a;
  a.theta = static_cast<double>(d - 2) / d;
  a.z_star = std::pow(a.theta, 0.5 * d);
  a.f_star = a.F(a.z_star);
  return a;
}

double k_star(double du_l1, double t_star, double delta) {
  if (!(t_star > 0.0)) throw DomainError("t* must be positive");
  if (!(du_l1 >= 0.0)) throw DomainError("||Du||_1 must be nonnegative");
  return std::pow(du_l1 / t_star + 1.0, 0.5 * (1.0 + delta));
}

double OmegaEnvelope::at(double t_query) const {
  const auto it = std::upper_bound(t.begin(), t.end(), t_query);
  if (it == t.begin()) return 0.0;
  return e[static_cast<std::size_t>(std::distance(t.begin(), it)) - 1];
}

OmegaEnvelope omega_envelope(std::span<const SuperlevelCurve> curves, std::span<const std::string> provenance) {
  if (curves.empty()) throw DomainError("omega envelope needs at least one curve");
  std::vector<std::pair<double, double>> pairs;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.k.size(); ++i) pairs.emplace_back(c.omega_arg[i], c.excess(i));
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  OmegaEnvelope env;
  double running = 0.0;
  for (const auto& [t, e] : pairs) {
    running = std::max(running, e);
    if (!env.t.empty() && env.t.back() == t) {
      env.e.back() = running;
    } else {
      env.t.push_back(t);
      env.e.push_back(running);
    }
  }
  env.provenance.assign(provenance.begin(), provenance.end());
  return env;
}

RegularityReport regularity_report(const ErgodicSolution& sol, const ErgodicProblem& problem,
                                   const SpectrumWorkspace& ws) {
  const GridSpec& grid = sol.u.grid();
  const VectorField du = gradient(sol.u, ws);
  const ScalarField lap = laplacian(sol.u, ws);
  const double gamma = problem.H.gamma();
  std::vector<double> gradpow(grid.size()), du_abs(grid.size()), f_eff(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = du.norm_squared(i);
    gradpow[i] = std::pow(s, 0.5 * gamma);
    du_abs[i] = std::sqrt(s);
    f_eff[i] = problem.f[i] - sol.lambda;
  }
  RegularityReport r;
  r.q = problem.q;
  r.gamma = gamma;
  r.norm_lap_q = lq_norm(lap, problem.q);
  r.norm_gradpow_q = lq_norm(ScalarField(grid, std::move(gradpow)), problem.q);
  r.norm_du_l1 = lq_norm(ScalarField(grid, std::move(du_abs)), 1.0);
  r.norm_f_eff_q = lq_norm(ScalarField(grid, std::move(f_eff)), problem.q);
  r.norm_f_raw_q = lq_norm(problem.f, problem.q);
  r.m_emp = r.norm_f_eff_q + r.norm_du_l1;
  r.k_emp = r.norm_lap_q + r.norm_gradpow_q;
  return r;
}

}  // namespace hjlab
