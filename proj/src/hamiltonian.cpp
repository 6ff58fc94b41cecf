#include "hjlab/hamiltonian.hpp"

#include <array>
#include <cmath>
#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

double norm_squared(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) s += x * x;
  return s;
}

}  // namespace

Perturbation cosine_perturbation(double amplitude) {
  Perturbation b;
  b.name = "cosine";
  b.bound = std::abs(amplitude);
  b.value = [amplitude](std::span<const double> p) { return amplitude * std::cos(norm_squared(p)); };
  b.gradient = [amplitude](std::span<const double> p, std::span<double> out) {
    const double factor = -2.0 * amplitude * std::sin(norm_squared(p));
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = factor * p[i];
  };
  return b;
}

Hamiltonian::Hamiltonian(double gamma, double c1) : gamma_(gamma), c1_(c1) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw DomainError("Hamiltonian exponent gamma must exceed 1, got " + std::to_string(gamma));
  }
  if (!(c1 > 0.0) || !std::isfinite(c1)) {
    throw DomainError("Hamiltonian coefficient c1 must be positive, got " + std::to_string(c1));
  }
}

Hamiltonian::Hamiltonian(double gamma, double c1, Perturbation perturbation) : Hamiltonian(gamma, c1) {
  if (!perturbation.value || !perturbation.gradient) {
    throw ConfigurationError("perturbation needs both a value and a gradient");
  }
  if (!(perturbation.bound >= 0.0)) throw DomainError("perturbation bound must be nonnegative");
  // Box [-8, 8]^d sampled on a 33-point lattice per axis, d = 1..3.
  constexpr int kPoints = 33;
  for (int d = 1; d <= 3; ++d) {
    std::array<double, 3> p{};
    int total = 1;
    for (int a = 0; a < d; ++a) total *= kPoints;
    for (int idx = 0; idx < total; ++idx) {
      int rest = idx;
      for (int a = 0; a < d; ++a) {
        p[static_cast<std::size_t>(a)] = -8.0 + 16.0 * (rest % kPoints) / (kPoints - 1);
        rest /= kPoints;
      }
      const double b = perturbation.value(std::span<const double>(p.data(), static_cast<std::size_t>(d)));
      if (!(std::abs(b) <= perturbation.bound * (1.0 + 1e-12))) {
        throw DomainError("perturbation '" + perturbation.name + "' exceeds its declared bound " +
                          std::to_string(perturbation.bound));
      }
    }
  }
  perturbation_ = std::move(perturbation);
}

double Hamiltonian::value(std::span<const double> p) const {
  const double s = norm_squared(p);
  double h = gamma_ == 2.0 ? c1_ * s : c1_ * std::pow(s, 0.5 * gamma_);
  if (perturbation_) h += perturbation_->value(p);
  return h;
}

void Hamiltonian::gradient(std::span<const double> p, std::span<double> out) const {
  const double s = norm_squared(p);
  double factor = 0.0;
  if (gamma_ == 2.0) {
    factor = 2.0 * c1_;
  } else if (s > 0.0) {
    factor = c1_ * gamma_ * std::pow(s, 0.5 * gamma_ - 1.0);
  }
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = factor * p[i];
  if (perturbation_) {
    std::array<double, 3> extra{};
    perturbation_->gradient(p, std::span<double>(extra.data(), p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += extra[i];
  }
}

}  // namespace hjlab
