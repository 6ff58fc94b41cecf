#include "hjlab/source.hpp"

#include <complex>
#include <map>
#include <random>

#include "hjlab/errors.hpp"

namespace hjlab {

ScalarField generate_source(std::uint64_t seed, int band_limit, double M_target, double q,
                            const SpectrumWorkspace& ws) {
  const GridSpec& grid = ws.grid();
  if (band_limit < 0 || 4 * band_limit >= grid.n()) {
    throw ConfigurationError("band_limit " + std::to_string(band_limit) + " is not below n/4 = " +
                             std::to_string(grid.n() / 4));
  }
  if (!(M_target >= 0.0)) throw ConfigurationError("M_target must be nonnegative");
  const int d = grid.dim();
  const int side = 2 * band_limit + 1;
  int count = 1;
  for (int j = 0; j < d; ++j) count *= side;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::map<std::array<int, 3>, std::complex<double>> raw;
  for (int c = 0; c < count; ++c) {
    std::array<int, 3> m{};
    int rest = c;
    for (int j = d - 1; j >= 0; --j) {
      m[j] = rest % side - band_limit;
      rest /= side;
    }
    const double re = normal(rng);
    const double im = normal(rng);
    raw[m] = {re, im};
  }

  Spectrum coeffs(grid.size(), {0.0, 0.0});
  for (const auto& [m, z] : raw) {
    std::array<int, 3> neg{};
    bool zero = true;
    for (int j = 0; j < d; ++j) {
      neg[j] = -m[j];
      zero = zero && m[j] == 0;
    }
    if (zero) continue;
    const std::complex<double> c = 0.5 * (z + std::conj(raw.at(neg)));
    std::array<int, 3> idx{};
    for (int j = 0; j < d; ++j) idx[j] = (m[j] + grid.n()) % grid.n();
    coeffs[grid.flat(idx)] = c;
  }

  std::vector<double> values = ws.inverse(coeffs);
  const ScalarField raw_field(grid, values);
  if (M_target == 0.0) return ScalarField::zeros(grid);
  const double norm = lq_norm(raw_field, q);
  if (!(norm > 0.0)) throw ConfigurationError("band_limit 0 gives a zero source; cannot rescale to M_target");
  const double scale = M_target / norm;
  for (double& v : values) v *= scale;
  return ScalarField(grid, std::move(values));
}

}  // namespace hjlab
