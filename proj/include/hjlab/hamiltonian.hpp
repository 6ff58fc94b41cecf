#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace hjlab {

/// Bounded additive term b(p) of a generalized Hamiltonian, with its gradient
/// and a declared bound sup|b| <= bound.
struct Perturbation {
  std::string name;
  double bound = 0.0;
  std::function<double(std::span<const double>)> value;
  std::function<void(std::span<const double>, std::span<double>)> gradient;
};

/// b(p) = amplitude * cos(|p|^2).
Perturbation cosine_perturbation(double amplitude);

/// H(p) = c1 |p|^gamma + b(p).
class Hamiltonian {
 public:
  explicit Hamiltonian(double gamma, double c1 = 1.0);
  /// Samples the perturbation on a box of gradients and rejects it when
  /// |b| exceeds its declared bound anywhere.
  Hamiltonian(double gamma, double c1, Perturbation perturbation);

  double gamma() const noexcept { return gamma_; }
  double c1() const noexcept { return c1_; }
  bool is_pure_power() const noexcept { return !perturbation_.has_value(); }
  const std::optional<Perturbation>& perturbation() const noexcept { return perturbation_; }

  double value(std::span<const double> p) const;
  /// DH(p); the power part is c1*gamma*|p|^(gamma-2) p, taken as 0 at p = 0.
  void gradient(std::span<const double> p, std::span<double> out) const;

 private:
  double gamma_;
  double c1_;
  std::optional<Perturbation> perturbation_;
};

}  // namespace hjlab
