#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hjlab/grid.hpp"

namespace hjlab {

/// Real grid function on the periodic unit cube. Immutable once built; every
/// value is finite.
class ScalarField {
 public:
  ScalarField(GridSpec grid, std::vector<double> values);

  static ScalarField constant(const GridSpec& grid, double value);
  static ScalarField zeros(const GridSpec& grid) { return constant(grid, 0.0); }
  /// Samples fn at every node.
  static ScalarField sample(const GridSpec& grid,
                            const std::function<double(const std::array<double, 3>&)>& fn);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  double mean() const noexcept;
  double max() const noexcept;
  double min() const noexcept;
  double max_abs() const noexcept;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// d components sharing one grid; houses Du.
class VectorField {
 public:
  explicit VectorField(std::vector<ScalarField> components);

  const GridSpec& grid() const noexcept { return components_.front().grid(); }
  int dim() const noexcept { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int j) const { return components_.at(static_cast<std::size_t>(j)); }

  /// |v|^2 at a node.
  double norm_squared(std::size_t node) const noexcept;
  ScalarField norm_squared() const;

 private:
  std::vector<ScalarField> components_;
};

/// Symmetric second derivatives, stored for i <= j in row order.
class HessianField {
 public:
  explicit HessianField(std::vector<ScalarField> entries);

  int dim() const noexcept { return dim_; }
  const GridSpec& grid() const noexcept { return entries_.front().grid(); }
  const ScalarField& operator()(int i, int j) const;
  ScalarField trace() const;
  /// Frobenius norm squared at a node (off-diagonal entries counted twice).
  double frobenius_squared(std::size_t node) const noexcept;

  static std::size_t slot(int dim, int i, int j) noexcept;

 private:
  int dim_;
  std::vector<ScalarField> entries_;
};

/// ||u||_{L^q(Q)} by the periodic rectangle rule; q >= 1.
double lq_norm(const ScalarField& u, double q);

/// Measure of {u > k}: cell volume times the number of nodes strictly above k.
double superlevel_measure(const ScalarField& u, double k) noexcept;

}  // namespace hjlab
