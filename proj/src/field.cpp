#include "hjlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

ScalarField::ScalarField(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ConfigurationError("field has " + std::to_string(values_.size()) +
                             " values but the grid has " + std::to_string(grid_.size()) +
                             " nodes");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw EvaluationError("non-finite field value at node " + std::to_string(i), i);
    }
  }
}

ScalarField ScalarField::constant(const GridSpec& grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.size(), value));
}

ScalarField ScalarField::sample(const GridSpec& grid,
                                const std::function<double(const std::array<double, 3>&)>& fn) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
  return ScalarField(grid, std::move(v));
}

double ScalarField::mean() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

double ScalarField::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

VectorField::VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
  if (components_.empty()) throw ConfigurationError("vector field needs at least one component");
  for (const auto& c : components_) {
    if (!(c.grid() == components_.front().grid())) {
      throw ConfigurationError("vector field components live on different grids");
    }
  }
}

double VectorField::norm_squared(std::size_t node) const noexcept {
  double s = 0.0;
  for (const auto& c : components_) s += c[node] * c[node];
  return s;
}

ScalarField VectorField::norm_squared() const {
  std::vector<double> v(grid().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = norm_squared(i);
  return ScalarField(grid(), std::move(v));
}

std::size_t HessianField::slot(int dim, int i, int j) noexcept {
  if (i > j) std::swap(i, j);
  // Rows 0..i-1 hold dim, dim-1, ... entries.
  const int before = i * dim - i * (i - 1) / 2;
  return static_cast<std::size_t>(before + (j - i));
}

HessianField::HessianField(std::vector<ScalarField> entries) : dim_(0), entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigurationError("hessian needs at least one entry");
  dim_ = entries_.front().grid().dim();
  if (entries_.size() != static_cast<std::size_t>(dim_ * (dim_ + 1) / 2)) {
    throw ConfigurationError("hessian entry count does not match d(d+1)/2");
  }
}

const ScalarField& HessianField::operator()(int i, int j) const { return entries_.at(slot(dim_, i, j)); }

ScalarField HessianField::trace() const {
  std::vector<double> v(grid().size(), 0.0);
  for (int i = 0; i < dim_; ++i) {
    const auto& e = (*this)(i, i);
    for (std::size_t n = 0; n < v.size(); ++n) v[n] += e[n];
  }
  return ScalarField(grid(), std::move(v));
}

double HessianField::frobenius_squared(std::size_t node) const noexcept {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      const double e = entries_[slot(dim_, i, j)][node];
      s += (i == j ? 1.0 : 2.0) * e * e;
    }
  }
  return s;
}

double lq_norm(const ScalarField& u, double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw DomainError("L^q norm needs a finite q >= 1, got " + std::to_string(q));
  }
  double s = 0.0;
  if (q == 1.0) {
    for (double v : u.values()) s += std::abs(v);
  } else if (q == 2.0) {
    for (double v : u.values()) s += v * v;
  } else {
    for (double v : u.values()) s += std::pow(std::abs(v), q);
  }
  return std::pow(u.grid().cell_volume() * s, 1.0 / q);
}

double superlevel_measure(const ScalarField& u, double k) noexcept {
  std::size_t count = 0;
  for (double v : u.values()) count += (v > k) ? 1 : 0;
  return u.grid().cell_volume() * static_cast<double>(count);
}

}  // namespace hjlab
