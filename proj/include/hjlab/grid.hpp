#pragma once

#include <array>
#include <cstddef>

namespace hjlab {

/// Uniform periodic grid on the unit cube (-1/2, 1/2)^d.
///
/// Node j in {0,...,n-1}^d sits at x = -1/2 + j/n componentwise. Flat indices
/// are row-major with the last axis fastest.
class GridSpec {
 public:
  GridSpec(int dim, int n);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }
  double cell_volume() const noexcept;
  std::size_t size() const noexcept { return size_; }

  /// Multi-index of a flat node index; unused trailing axes are 0.
  std::array<int, 3> index(std::size_t flat) const noexcept;
  std::size_t flat(const std::array<int, 3>& index) const noexcept;
  /// Physical coordinates of a node; unused trailing axes are 0.
  std::array<double, 3> node(std::size_t flat) const noexcept;

  /// Same dimension, twice the resolution.
  GridSpec refined() const { return GridSpec(dim_, 2 * n_); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int dim_;
  int n_;
  std::size_t size_;
};

bool is_power_of_two(int n) noexcept;

}  // namespace hjlab
