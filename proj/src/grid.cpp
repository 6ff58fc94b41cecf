#include "hjlab/grid.hpp"

#include <string>

#include "hjlab/errors.hpp"

namespace hjlab {

bool is_power_of_two(int n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

GridSpec::GridSpec(int dim, int n) : dim_(dim), n_(n), size_(1) {
  if (dim < 1 || dim > 3) {
    throw ConfigurationError("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (n < 8 || !is_power_of_two(n)) {
    throw ConfigurationError("points per dimension must be a power of two >= 8, got " +
                             std::to_string(n));
  }
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
}

double GridSpec::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing();
  return v;
}

std::array<int, 3> GridSpec::index(std::size_t flat) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  const auto un = static_cast<std::size_t>(n_);
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % un);
    flat /= un;
  }
  return idx;
}

std::size_t GridSpec::flat(const std::array<int, 3>& index) const noexcept {
  std::size_t f = 0;
  for (int a = 0; a < dim_; ++a) {
    int j = index[a] % n_;
    if (j < 0) j += n_;
    f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
  }
  return f;
}

std::array<double, 3> GridSpec::node(std::size_t flat) const noexcept {
  const auto idx = index(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = -0.5 + idx[a] * spacing();
  return x;
}

}  // namespace hjlab
