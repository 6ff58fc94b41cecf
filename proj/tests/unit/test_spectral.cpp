#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hjlab/errors.hpp"
#include "hjlab/source.hpp"
#include "hjlab/spectral.hpp"

using namespace hjlab;

namespace {

constexpr double pi = std::numbers::pi;

double max_diff(const ScalarField& a, const std::function<double(const std::array<double, 3>&)>& exact) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - exact(a.grid().node(i))));
  return m;
}

}  // namespace

TEST_CASE("gradient of eigenfunctions", "[spectral]") {
  const GridSpec g(2, 32);
  const SpectrumWorkspace ws(g);
  const auto u = ScalarField::sample(g, [](const auto& x) { return std::sin(2 * pi * x[0]); });
  const VectorField du = gradient(u, ws);
  CHECK(max_diff(du[0], [](const auto& x) { return 2 * pi * std::cos(2 * pi * x[0]); }) < 1e-12);
  CHECK(du[1].max_abs() < 1e-12);

  const auto v = ScalarField::sample(g, [](const auto& x) { return std::cos(2 * pi * (x[0] + 2 * x[1])); });
  CHECK(max_diff(gradient(v, ws)[1], [](const auto& x) { return -4 * pi * std::sin(2 * pi * (x[0] + 2 * x[1])); }) <
        1e-12);

  const VectorField dc = gradient(ScalarField::constant(g, 4.2), ws);
  CHECK(dc[0].max_abs() == 0.0);
  CHECK(dc[1].max_abs() == 0.0);
}

TEST_CASE("laplacian of eigenfunctions", "[spectral]") {
  const GridSpec g(2, 32);
  const SpectrumWorkspace ws(g);
  const auto u = ScalarField::sample(g, [](const auto& x) { return std::sin(2 * pi * x[0]); });
  CHECK(max_diff(laplacian(u, ws), [](const auto& x) { return -4 * pi * pi * std::sin(2 * pi * x[0]); }) < 1e-11);
  const auto v = ScalarField::sample(g, [](const auto& x) { return std::cos(2 * pi * (x[0] + 2 * x[1])); });
  const ScalarField lv = laplacian(v, ws);
  CHECK(max_diff(lv, [](const auto& x) { return -20 * pi * pi * std::cos(2 * pi * (x[0] + 2 * x[1])); }) < 1e-10);
  CHECK(std::abs(lv.mean()) < 1e-12);
  CHECK(laplacian(ScalarField::constant(g, -1.0), ws).max_abs() == 0.0);
}

TEST_CASE("hessian entries and trace", "[spectral]") {
  const GridSpec g(2, 32);
  const SpectrumWorkspace ws(g);
  const auto u = ScalarField::sample(g, [](const auto& x) { return std::sin(2 * pi * x[0]); });
  const HessianField h = hessian(u, ws);
  CHECK(max_diff(h(0, 0), [](const auto& x) { return -4 * pi * pi * std::sin(2 * pi * x[0]); }) < 1e-11);
  CHECK(h(0, 1).max_abs() < 1e-12);
  const auto v = ScalarField::sample(g, [](const auto& x) { return std::cos(2 * pi * (x[0] + 2 * x[1])); });
  CHECK(max_diff(hessian(v, ws)(0, 1), [](const auto& x) { return -8 * pi * pi * std::cos(2 * pi * (x[0] + 2 * x[1])); }) <
        1e-10);

  for (int d = 1; d <= 3; ++d) {
    const GridSpec gd(d, 16);
    const SpectrumWorkspace wsd(gd);
    const ScalarField r = generate_source(42 + d, 3, 1.0, 2.0, wsd);
    const ScalarField tr = hessian(r, wsd).trace();
    const ScalarField lap = laplacian(r, wsd);
    double diff = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) diff = std::max(diff, std::abs(tr[i] - lap[i]));
    CHECK(diff < 1e-10);
  }
}

TEST_CASE("every resolved mode is differentiated exactly", "[spectral]") {
  for (int d = 1; d <= 2; ++d) {
    const GridSpec g(d, 32);
    const SpectrumWorkspace ws(g);
    const int band = g.n() / 4 - 1;
    for (int m0 = -band; m0 <= band; m0 += 3) {
      for (int m1 = (d == 2 ? -band : 0); m1 <= (d == 2 ? band : 0); m1 += 4) {
        const double k0 = 2 * pi * m0, k1 = 2 * pi * m1;
        auto phase = [&](const auto& x) { return k0 * x[0] + k1 * x[1]; };
        const auto u = ScalarField::sample(g, [&](const auto& x) { return std::sin(phase(x)) + 0.5 * std::cos(phase(x)); });
        const VectorField du = gradient(u, ws);
        const double scale = 1.0 + (k0 * k0 + k1 * k1);
        CHECK(max_diff(du[0], [&](const auto& x) { return k0 * (std::cos(phase(x)) - 0.5 * std::sin(phase(x))); }) <
              1e-11 * scale);
        CHECK(max_diff(laplacian(u, ws), [&](const auto& x) {
                return -(k0 * k0 + k1 * k1) * (std::sin(phase(x)) + 0.5 * std::cos(phase(x)));
              }) < 1e-11 * scale);
      }
    }
  }
}

TEST_CASE("Parseval consistency", "[spectral]") {
  const GridSpec g(2, 32);
  const SpectrumWorkspace ws(g);
  const ScalarField r = generate_source(7, 5, 2.0, 3.0, ws);
  const double l2 = lq_norm(r, 2.0);
  CHECK(std::abs(l2 * l2 - spectral_energy(r, ws)) < 1e-10);
}

TEST_CASE("grid mismatch is a configuration error", "[spectral]") {
  const SpectrumWorkspace ws(GridSpec(2, 16));
  const auto u = ScalarField::zeros(GridSpec(2, 32));
  CHECK_THROWS_AS(gradient(u, ws), ConfigurationError);
  CHECK_THROWS_AS(laplacian(u, ws), ConfigurationError);
  CHECK_THROWS_AS(hessian(u, ws), ConfigurationError);
}

TEST_CASE("nonlinear_eval identity, square and oversampling", "[spectral]") {
  const GridSpec g(1, 32);
  const SpectrumWorkspace ws(g);
  const auto c = ScalarField::sample(g, [](const auto& x) { return std::cos(2 * pi * x[0]); });
  const std::vector<ScalarField> in{c};

  const ScalarField id = nonlinear_eval([](std::span<const double> v) { return v[0]; }, in, 1, ws);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(id[i] == c[i]);

  const ScalarField sq = nonlinear_eval([](std::span<const double> v) { return v[0] * v[0]; }, in, 2, ws);
  CHECK(max_diff(sq, [](const auto& x) { return 0.5 * (1 + std::cos(4 * pi * x[0])); }) < 1e-12);
}

TEST_CASE("oversampled evaluation matches the doubled grid", "[spectral]") {
  const GridSpec g(2, 32);
  const SpectrumWorkspace ws(g);
  const SpectrumWorkspace ws2(g.refined());
  // The same trigonometric polynomial on both grids.
  const ScalarField r = generate_source(11, 5, 1.0, 2.0, ws);
  const ScalarField r2 = generate_source(11, 5, 1.0, 2.0, ws2);
  auto sq = [](std::span<const double> v) { return v[0] * v[0]; };
  const std::vector<ScalarField> a{r}, b{r2};
  const ScalarField coarse = nonlinear_eval(sq, a, 2, ws);
  const ScalarField fine = nonlinear_eval(sq, b, 1, ws2);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.index(i);
    for (auto& j : idx) j *= 2;
    diff = std::max(diff, std::abs(coarse[i] - fine[g.refined().flat(idx)]));
  }
  CHECK(diff < 1e-10);
}

TEST_CASE("non-finite nonlinear output names the node", "[spectral]") {
  const GridSpec g(1, 16);
  const SpectrumWorkspace ws(g);
  const auto x = ScalarField::sample(g, [](const auto& p) { return p[0]; });
  const std::vector<ScalarField> in{x};
  try {
    nonlinear_eval([](std::span<const double> v) { return std::log(v[0] + 0.5); }, in, 1, ws);
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& e) {
    CHECK(e.node() == 0);
  }
}
