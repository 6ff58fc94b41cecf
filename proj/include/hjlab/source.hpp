#pragma once

#include <cstdint>

#include "hjlab/field.hpp"
#include "hjlab/spectral.hpp"

namespace hjlab {

/// Name of the generator recorded in manifests.
inline constexpr const char* kSourceGenerator = "mt19937_64 + std::normal_distribution";

/// Random real trigonometric polynomial with modes |m_j| <= band_limit.
///
/// Coefficients are drawn for m in [-B, B]^d in lexicographic order (independent
/// of n), Hermitian-symmetrized, the zero mode cleared, and the field rescaled
/// so ||f||_q = M_target. The same seed gives the same polynomial on every grid.
/// Needs band_limit < n/4.
ScalarField generate_source(std::uint64_t seed, int band_limit, double M_target, double q,
                            const SpectrumWorkspace& ws);

}  // namespace hjlab
