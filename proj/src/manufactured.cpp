#include "hjlab/manufactured.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "hjlab/errors.hpp"

namespace hjlab {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double phase(const ManufacturedSolution& ms, const ManufacturedSolution::Mode& mode, const std::array<double, 3>& x) {
  double s = 0.0;
  for (int j = 0; j < ms.dim; ++j) s += mode.m[j] * x[j];
  return two_pi * s;
}

}  // namespace

double ManufacturedSolution::value(const std::array<double, 3>& x) const {
  double v = 0.0;
  for (const auto& mode : modes) {
    const double t = phase(*this, mode, x);
    v += mode.a * std::cos(t) + mode.b * std::sin(t);
  }
  return v;
}

std::array<double, 3> ManufacturedSolution::gradient(const std::array<double, 3>& x) const {
  std::array<double, 3> g{};
  for (const auto& mode : modes) {
    const double t = phase(*this, mode, x);
    const double dt = -mode.a * std::sin(t) + mode.b * std::cos(t);
    for (int j = 0; j < dim; ++j) g[j] += two_pi * mode.m[j] * dt;
  }
  return g;
}

double ManufacturedSolution::laplacian(const std::array<double, 3>& x) const {
  double v = 0.0;
  for (const auto& mode : modes) {
    const double t = phase(*this, mode, x);
    double m2 = 0.0;
    for (int j = 0; j < dim; ++j) m2 += static_cast<double>(mode.m[j]) * mode.m[j];
    v -= two_pi * two_pi * m2 * (mode.a * std::cos(t) + mode.b * std::sin(t));
  }
  return v;
}

int ManufacturedSolution::band() const {
  int b = 0;
  for (const auto& mode : modes) {
    for (int j = 0; j < dim; ++j) b = std::max(b, std::abs(mode.m[j]));
  }
  return b;
}

ManufacturedSolution default_manufactured(int dim) {
  ManufacturedSolution ms;
  ms.dim = dim;
  switch (dim) {
    case 1:
      ms.modes = {{{1, 0, 0}, 0.1, 0.0}, {{2, 0, 0}, 0.0, 0.03}};
      break;
    case 2:
      ms.modes = {{{1, 0, 0}, 0.1, 0.0}, {{0, 1, 0}, 0.0, 0.05}, {{1, 2, 0}, 0.02, 0.01}};
      break;
    case 3:
      ms.modes = {{{1, 0, 0}, 0.1, 0.0}, {{0, 1, 0}, 0.0, 0.05}, {{0, 1, 1}, 0.03, 0.0}, {{1, 0, -1}, 0.0, 0.02}};
      break;
    default:
      throw ConfigurationError("manufactured solutions exist for d in {1, 2, 3}");
  }
  return ms;
}

ScalarField manufactured_field(const ManufacturedSolution& ms, const GridSpec& grid) {
  if (ms.dim != grid.dim()) throw ConfigurationError("manufactured solution and grid differ in dimension");
  return ScalarField::sample(grid, [&](const std::array<double, 3>& x) { return ms.value(x); });
}

ScalarField manufactured_source(const ManufacturedSolution& ms, const Hamiltonian& H, const GridSpec& grid) {
  if (ms.dim != grid.dim()) throw ConfigurationError("manufactured solution and grid differ in dimension");
  return ScalarField::sample(grid, [&](const std::array<double, 3>& x) {
    const auto g = ms.gradient(x);
    return -ms.laplacian(x) + H.value(std::span<const double>(g.data(), static_cast<std::size_t>(ms.dim)));
  });
}

}  // namespace hjlab
