#include "hjlab/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace hjlab {

double ErgodicProblem::critical_exponent() const noexcept {
  const double g = H.gamma();
  return f.grid().dim() * (g - 1.0) / g;
}

bool ErgodicProblem::above_critical() const noexcept { return q > critical_exponent() && q > 1.0; }

void SolveSettings::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigurationError(std::string(name) + " must be a positive finite number");
    }
  };
  if (!(relax_dt >= 0.0) || !std::isfinite(relax_dt)) {
    throw ConfigurationError("relax_dt must be >= 0 (0 selects the adaptive step)");
  }
  positive(relax_tol, "relax_tol");
  positive(newton_tol, "newton_tol");
  positive(linear_tol, "linear_tol");
  if (max_linear_iterations == 0 || gmres_restart == 0) {
    throw ConfigurationError("Krylov iteration caps must be >= 1");
  }
}

namespace {

using Vec = std::vector<double>;
using LinearOp = std::function<Vec(const Vec&)>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double mean_of(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s / static_cast<double>(a.size());
}

void recenter(Vec& u) {
  const double m = mean_of(u);
  for (auto& x : u) x -= m;
}

// Restarted GMRES with right preconditioning; returns x with A x ~= b.
Vec gmres(const LinearOp& apply, const LinearOp& precondition, const Vec& b, double rel_tol,
          std::size_t max_iterations, std::size_t restart) {
  const std::size_t n = b.size();
  Vec x(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return x;
  const double target = rel_tol * bnorm;

  Vec r = b;
  double beta = bnorm;
  std::size_t total = 0;
  while (total < max_iterations && beta > target) {
    const std::size_t m = std::min(restart, max_iterations - total);
    std::vector<Vec> basis;
    basis.reserve(m + 1);
    basis.push_back(r);
    for (auto& v : basis.back()) v /= beta;
    std::vector<Vec> hess(m + 1, Vec(m, 0.0));
    Vec cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;
    std::size_t k = 0;
    for (; k < m; ++k) {
      Vec w = apply(precondition(basis[k]));
      ++total;
      for (std::size_t i = 0; i <= k; ++i) {
        hess[i][k] = dot(w, basis[i]);
        for (std::size_t t = 0; t < n; ++t) w[t] -= hess[i][k] * basis[i][t];
      }
      hess[k + 1][k] = norm2(w);
      for (std::size_t i = 0; i < k; ++i) {
        const double tmp = cs[i] * hess[i][k] + sn[i] * hess[i + 1][k];
        hess[i + 1][k] = -sn[i] * hess[i][k] + cs[i] * hess[i + 1][k];
        hess[i][k] = tmp;
      }
      const double denom = std::hypot(hess[k][k], hess[k + 1][k]);
      if (denom == 0.0) {
        ++k;
        break;
      }
      cs[k] = hess[k][k] / denom;
      sn[k] = hess[k + 1][k] / denom;
      const double hk1 = hess[k + 1][k];
      hess[k][k] = denom;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      const bool done = std::abs(g[k + 1]) <= target || hk1 == 0.0;
      if (!done) {
        Vec next = w;
        for (auto& v : next) v /= hk1;
        basis.push_back(std::move(next));
      }
      if (done) {
        ++k;
        break;
      }
    }
    // Back substitution on the k x k triangle.
    Vec y(k, 0.0);
    for (std::size_t ii = k; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t j = ii + 1; j < k; ++j) s -= hess[ii][j] * y[j];
      y[ii] = hess[ii][ii] != 0.0 ? s / hess[ii][ii] : 0.0;
    }
    Vec combo(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t t = 0; t < n; ++t) combo[t] += y[j] * basis[j][t];
    }
    const Vec dx = precondition(combo);
    for (std::size_t t = 0; t < n; ++t) x[t] += dx[t];
    const Vec ax = apply(x);
    for (std::size_t t = 0; t < n; ++t) r[t] = b[t] - ax[t];
    beta = norm2(r);
    if (k == 0) break;
  }
  return x;
}

struct Merit {
  double inf = 0.0;
  double l2 = 0.0;
};

Merit measure(const Vec& residual, double mean_u, double cell_volume) {
  Merit m;
  double s = 0.0;
  for (double r : residual) s += r * r;
  m.l2 = std::sqrt(cell_volume * s);
  m.inf = std::max(max_abs(residual), std::abs(mean_u));
  return m;
}

}  // namespace

ResidualMap::ResidualMap(const ErgodicProblem& problem, const SpectrumWorkspace& ws)
    : problem_(&problem), ws_(&ws) {
  if (!(problem.f.grid() == ws.grid())) {
    throw ConfigurationError("source grid does not match the workspace grid");
  }
}

ResidualMap::State ResidualMap::evaluate(std::span<const double> u, double lambda, bool linearize) const {
  const auto& ws = *ws_;
  const auto& H = problem_->H;
  const int d = ws.grid().dim();
  const Spectrum uh = ws.forward(u);

  std::vector<std::vector<double>> du(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) du[static_cast<std::size_t>(a)] = ws.upsample(ws.derivative(uh, a));
  const std::size_t nf = ws.fine().grid().size();

  State state;
  std::vector<double> fine_h(nf);
  if (linearize) state.dh_fine.assign(static_cast<std::size_t>(d), std::vector<double>(nf));
  std::array<double, 3> p{}, g{};
  const auto pspan = std::span<const double>(p.data(), static_cast<std::size_t>(d));
  const auto gspan = std::span<double>(g.data(), static_cast<std::size_t>(d));
  double hsum = 0.0;
  for (std::size_t i = 0; i < nf; ++i) {
    for (int a = 0; a < d; ++a) p[static_cast<std::size_t>(a)] = du[static_cast<std::size_t>(a)][i];
    const double h = H.value(pspan);
    if (!std::isfinite(h)) {
      throw EvaluationError("H(Du) is not finite at oversampled node " + std::to_string(i), i);
    }
    fine_h[i] = h;
    hsum += h;
    H.gradient(pspan, gspan);
    double g2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double ga = g[static_cast<std::size_t>(a)];
      g2 += ga * ga;
      if (linearize) state.dh_fine[static_cast<std::size_t>(a)][i] = ga;
    }
    state.dh_max = std::max(state.dh_max, std::sqrt(g2));
  }
  state.hamiltonian_mean = hsum / static_cast<double>(nf);

  Spectrum rh = ws.downsample(fine_h);
  for (std::size_t k = 0; k < rh.size(); ++k) rh[k] -= ws.laplacian_multiplier(k) * uh[k];
  state.residual = ws.inverse(rh);
  const auto f = problem_->f.values();
  for (std::size_t k = 0; k < state.residual.size(); ++k) state.residual[k] += lambda - f[k];
  return state;
}

std::vector<double> ResidualMap::apply_jacobian(const State& state, std::span<const double> v,
                                                double mu) const {
  const auto& ws = *ws_;
  const int d = ws.grid().dim();
  if (state.dh_fine.size() != static_cast<std::size_t>(d)) {
    throw ConfigurationError("state was evaluated without linearization");
  }
  const Spectrum vh = ws.forward(v);
  const std::size_t nf = ws.fine().grid().size();
  std::vector<double> prod(nf, 0.0);
  for (int a = 0; a < d; ++a) {
    const auto dv = ws.upsample(ws.derivative(vh, a));
    const auto& dh = state.dh_fine[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < nf; ++i) prod[i] += dh[i] * dv[i];
  }
  Spectrum out = ws.downsample(prod);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= ws.laplacian_multiplier(k) * vh[k];
  auto result = ws.inverse(out);
  for (auto& x : result) x += mu;
  return result;
}

ErgodicSolution relax_to_steady(const ErgodicProblem& problem, const SolveSettings& settings,
                                const SpectrumWorkspace& ws) {
  settings.validate();
  const ResidualMap map(problem, ws);
  const GridSpec& grid = ws.grid();
  const double cell = grid.cell_volume();
  const auto f = problem.f.values();
  std::vector<double> u(grid.size(), 0.0);
  double lambda = 0.0;

  std::size_t step = 0;
  Merit merit;
  for (;; ++step) {
    ResidualMap::State state;
    try {
      state = map.evaluate(u, 0.0, false);
    } catch (const EvaluationError&) {
      throw DivergenceError("relaxation blew up at step " + std::to_string(step) +
                                "; try a smaller relax_dt",
                            step);
    }
    // lambda = mean(f) - mean(H(Du)) makes the residual mean-free.
    lambda = mean_of(f) - state.hamiltonian_mean;
    for (auto& r : state.residual) r += lambda;
    merit = measure(state.residual, 0.0, cell);
    if (!std::isfinite(merit.inf) || merit.inf > 1e100) {
      throw DivergenceError("relaxation blew up at step " + std::to_string(step) +
                                "; try a smaller relax_dt",
                            step);
    }
    if (merit.inf <= settings.relax_tol || step >= settings.max_relax_steps) break;

    const double dt = settings.relax_dt > 0.0 ? settings.relax_dt
                                              : 0.5 / (1.0 + state.dh_max * state.dh_max);
    // u_new = (1 - dt Lap)^{-1} (u - dt (R + Lap u)), R + Lap u = H(Du) + lambda - f.
    const Spectrum uh = ws.forward(u);
    const Spectrum rh = ws.forward(state.residual);
    Spectrum next(uh.size());
    for (std::size_t k = 0; k < uh.size(); ++k) {
      const double lap = ws.laplacian_multiplier(k);
      next[k] = (uh[k] - dt * (rh[k] + lap * uh[k])) / (1.0 - dt * lap);
    }
    next[0] = 0.0;
    u = ws.inverse(next);
    recenter(u);
  }

  ErgodicSolution sol{ScalarField(grid, std::move(u)), lambda, merit.inf, merit.l2, step, 0, false};
  sol.converged = sol.residual_inf <= settings.newton_tol;
  return sol;
}

ErgodicSolution newton_refine(const ErgodicSolution& seed, const ErgodicProblem& problem,
                              const SolveSettings& settings, const SpectrumWorkspace& ws) {
  settings.validate();
  const ResidualMap map(problem, ws);
  const GridSpec& grid = ws.grid();
  const double cell = grid.cell_volume();
  const std::size_t n = grid.size();

  std::vector<double> u(seed.u.values().begin(), seed.u.values().end());
  double lambda = seed.lambda;
  auto state = map.evaluate(u, lambda, true);
  Merit merit = measure(state.residual, mean_of(u), cell);
  if (!std::isfinite(merit.l2)) throw NonConvergenceError("seed residual is not finite", seed);

  auto snapshot = [&](std::size_t steps, bool converged) {
    return ErgodicSolution{ScalarField(grid, u), lambda, merit.inf, merit.l2,
                           seed.relax_steps,    steps,  converged};
  };

  // Exact inverse of the operator linearized at Du = 0: (v, mu) -> (-Lap v + mu, mean v).
  const LinearOp precondition = [&](const Vec& r) {
    Vec out(n + 1);
    const std::span<const double> rv(r.data(), n);
    Spectrum rh = ws.forward(rv);
    const double mu = rh[0].real();
    for (std::size_t k = 1; k < n; ++k) rh[k] /= -ws.laplacian_multiplier(k);
    rh[0] = r[n];
    const auto v = ws.inverse(rh);
    std::copy(v.begin(), v.end(), out.begin());
    out[n] = mu;
    return out;
  };

  std::size_t steps = 0;
  while (merit.inf > settings.newton_tol) {
    if (steps >= settings.max_newton_steps) {
      throw NonConvergenceError("Newton iteration cap reached with residual " +
                                    std::to_string(merit.inf),
                                snapshot(steps, false));
    }
    const LinearOp apply = [&](const Vec& x) {
      Vec out(n + 1);
      const auto jv = map.apply_jacobian(state, std::span<const double>(x.data(), n), x[n]);
      std::copy(jv.begin(), jv.end(), out.begin());
      out[n] = mean_of(std::span<const double>(x.data(), n));
      return out;
    };
    Vec rhs(n + 1);
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -state.residual[k];
    rhs[n] = -mean_of(u);
    const Vec delta = gmres(apply, precondition, rhs, settings.linear_tol,
                            settings.max_linear_iterations, settings.gmres_restart);

    bool accepted = false;
    double alpha = 1.0;
    for (int attempt = 0; attempt < 4 && !accepted; ++attempt, alpha *= 0.5) {
      std::vector<double> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] + alpha * delta[k];
      recenter(trial);
      const double trial_lambda = lambda + alpha * delta[n];
      try {
        auto trial_state = map.evaluate(trial, trial_lambda, true);
        const Merit trial_merit = measure(trial_state.residual, mean_of(trial), cell);
        if (std::isfinite(trial_merit.l2) && trial_merit.l2 < merit.l2) {
          u = std::move(trial);
          lambda = trial_lambda;
          state = std::move(trial_state);
          merit = trial_merit;
          accepted = true;
        }
      } catch (const EvaluationError&) {
        // rejected like any other non-decreasing step
      }
    }
    if (!accepted) {
      throw NonConvergenceError("Newton stagnated at residual " + std::to_string(merit.inf) +
                                    " after 3 damped attempts",
                                snapshot(steps, false));
    }
    ++steps;
  }
  return snapshot(steps, true);
}

ErgodicSolution solve(const ErgodicProblem& problem, const SolveSettings& settings,
                      const SpectrumWorkspace& ws) {
  const ErgodicSolution seed = relax_to_steady(problem, settings, ws);
  try {
    return newton_refine(seed, problem, settings, ws);
  } catch (const NonConvergenceError& e) {
    return e.best();
  }
}

ScalarField residual_field(const ErgodicSolution& sol, const ErgodicProblem& problem,
                           const SpectrumWorkspace& ws) {
  const ResidualMap map(problem, ws);
  auto state = map.evaluate(sol.u.values(), sol.lambda, false);
  return ScalarField(ws.grid(), std::move(state.residual));
}

double integral_identity_check(const ErgodicSolution& sol, const ErgodicProblem& problem,
                               const SpectrumWorkspace& ws) {
  const ResidualMap map(problem, ws);
  const auto state = map.evaluate(sol.u.values(), sol.lambda, false);
  return std::abs(state.hamiltonian_mean + sol.lambda - problem.f.mean());
}

double hopf_cole_residual(const ErgodicSolution& sol, const ErgodicProblem& problem,
                          const SpectrumWorkspace& ws) {
  const auto& H = problem.H;
  if (H.gamma() != 2.0 || H.c1() != 1.0 || !H.is_pure_power()) {
    throw DomainError("the Hopf-Cole check needs H(p) = |p|^2");
  }
  std::vector<double> v(sol.u.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-sol.u[i]);
  const ScalarField vf(ws.grid(), v);
  const ScalarField lap = laplacian(vf, ws);
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    worst = std::max(worst, std::abs(lap[i] - (problem.f[i] - sol.lambda) * v[i]));
  }
  return worst / vf.max_abs();
}

}  // namespace hjlab
