#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/field.hpp"
#include "hjlab/hamiltonian.hpp"
#include "hjlab/spectral.hpp"

namespace hjlab {

/// Source f, Hamiltonian H and the Lebesgue exponent q under study. Solving is
/// allowed for any q; the admissibility flags only annotate the run.
struct ErgodicProblem {
  ScalarField f;
  Hamiltonian H;
  double q;

  double critical_exponent() const noexcept;
  /// q > d(gamma-1)/gamma (and q > 1).
  bool above_critical() const noexcept;
  /// q > 2, the extra restriction of the a priori estimate.
  bool above_two() const noexcept { return q > 2.0; }
  bool admissible() const noexcept { return above_critical() && above_two(); }
};

struct SolveSettings {
  /// Pseudo-time step; 0 selects 0.5 / (1 + max|DH(Du)|^2) at every step.
  double relax_dt = 0.0;
  double relax_tol = 1e-4;
  double newton_tol = 1e-10;
  double linear_tol = 1e-12;
  std::size_t max_relax_steps = 20000;
  std::size_t max_newton_steps = 30;
  std::size_t max_linear_iterations = 400;
  std::size_t gmres_restart = 60;

  /// Throws ConfigurationError on nonpositive tolerances or a negative step.
  void validate() const;
};

/// Mean-zero u and ergodic constant lambda with -Lap u + H(Du) + lambda = f.
struct ErgodicSolution {
  ScalarField u;
  double lambda = 0.0;
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  std::size_t relax_steps = 0;
  std::size_t newton_steps = 0;
  bool converged = false;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, ErgodicSolution best)
      : Error(what), best_(std::move(best)) {}
  const ErgodicSolution& best() const noexcept { return best_; }

 private:
  ErgodicSolution best_;
};

/// Discrete residual map R(u, lambda) = -Lap u + T[H(P Du)] + lambda - f, where
/// P zero-pads to the 2n grid and T truncates back, and its exact linearization.
class ResidualMap {
 public:
  ResidualMap(const ErgodicProblem& problem, const SpectrumWorkspace& ws);

  struct State {
    std::vector<double> residual;                 // R(u, lambda) at the nodes
    std::vector<std::vector<double>> dh_fine;     // DH(P Du) on the 2n grid, per axis
    double hamiltonian_mean = 0.0;                // mean of H(P Du) over the 2n grid
    double dh_max = 0.0;                          // max |DH(P Du)|
  };

  /// Throws EvaluationError if H(Du) is not finite somewhere.
  State evaluate(std::span<const double> u, double lambda, bool linearize) const;
  /// J(v, mu) = -Lap v + T[DH(P Du) . P Dv] + mu at the state's iterate.
  std::vector<double> apply_jacobian(const State& state, std::span<const double> v, double mu) const;

  const ErgodicProblem& problem() const noexcept { return *problem_; }
  const SpectrumWorkspace& workspace() const noexcept { return *ws_; }

 private:
  const ErgodicProblem* problem_;
  const SpectrumWorkspace* ws_;
};

/// Semi-implicit pseudo-time march of u_t = Lap u - H(Du) + f - lambda from
/// u = 0, re-centred to mean zero every step.
ErgodicSolution relax_to_steady(const ErgodicProblem& problem, const SolveSettings& settings,
                                const SpectrumWorkspace& ws);

/// Damped Newton-Krylov on (u, lambda) with mean(u) = 0 appended as an equation.
ErgodicSolution newton_refine(const ErgodicSolution& seed, const ErgodicProblem& problem,
                              const SolveSettings& settings, const SpectrumWorkspace& ws);

/// relax_to_steady followed by newton_refine. Newton stagnation is reported
/// through converged = false rather than an exception.
ErgodicSolution solve(const ErgodicProblem& problem, const SolveSettings& settings,
                      const SpectrumWorkspace& ws);

ScalarField residual_field(const ErgodicSolution& sol, const ErgodicProblem& problem,
                           const SpectrumWorkspace& ws);

/// |mean(H(Du)) + lambda - mean(f)|, the torus integral of the equation.
double integral_identity_check(const ErgodicSolution& sol, const ErgodicProblem& problem,
                               const SpectrumWorkspace& ws);

/// ||Lap v - (f - lambda) v||_inf / ||v||_inf for v = exp(-u); needs H = |p|^2.
double hopf_cole_residual(const ErgodicSolution& sol, const ErgodicProblem& problem,
                          const SpectrumWorkspace& ws);

}  // namespace hjlab
