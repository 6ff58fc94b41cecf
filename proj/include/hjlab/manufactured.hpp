#pragma once

#include <array>
#include <vector>

#include "hjlab/field.hpp"
#include "hjlab/hamiltonian.hpp"

namespace hjlab {

/// Trigonometric polynomial u*(x) = sum a cos(2 pi m.x) + b sin(2 pi m.x) over
/// nonzero integer modes m, so mean(u*) = 0 on every grid resolving them.
struct ManufacturedSolution {
  struct Mode {
    std::array<int, 3> m{};
    double a = 0.0;
    double b = 0.0;
  };
  int dim = 1;
  std::vector<Mode> modes;

  double value(const std::array<double, 3>& x) const;
  std::array<double, 3> gradient(const std::array<double, 3>& x) const;
  double laplacian(const std::array<double, 3>& x) const;
  /// Largest |m_j| over all modes.
  int band() const;
};

/// Default smooth u* of modest amplitude for d in {1, 2, 3}.
ManufacturedSolution default_manufactured(int dim);

/// u* sampled at the nodes.
ScalarField manufactured_field(const ManufacturedSolution& ms, const GridSpec& grid);

/// f* = -Lap u* + H(Du*) evaluated analytically at the nodes; solves with lambda = 0.
ScalarField manufactured_source(const ManufacturedSolution& ms, const Hamiltonian& H, const GridSpec& grid);

}  // namespace hjlab
