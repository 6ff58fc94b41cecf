#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "hjlab/errors.hpp"
#include "hjlab/counterexample.hpp"
#include "hjlab/persist.hpp"

using namespace hjlab;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> dyadic_eps() {
  std::vector<double> e;
  for (int k = 4; k <= 9; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

std::vector<double> log_radii(double lo, double hi, int count) {
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) r[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, i / (count - 1.0));
  return r;
}

}  // namespace

TEST_CASE("constants of the radial family", "[counterexample]") {
  CHECK(c_constant(3.0, 3) == Catch::Approx(-std::sqrt(1.5)).epsilon(1e-15));
  CHECK(std::pow(std::abs(c_constant(3.0, 3)), 2) == Catch::Approx(1.5).epsilon(1e-15));
  for (auto [g, d] : {std::pair{3.0, 3}, {2.5, 2}, {1.6, 4}, {4.0, 3}}) {
    const double c = c_constant(g, d);
    const double a = 1.0 / (g - 1.0);
    CHECK(std::pow(std::abs(c), g) == Catch::Approx(-(d - 1 - a) * c).epsilon(1e-14));
  }
  try {
    c_constant(1.4, 3);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("meaningful only if gamma > d/(d-1)"));
  }
  CHECK_THROWS_AS(c_constant(1.5, 3), DomainError);
  CHECK(critical_q(3.0, 3) == 2.0);
  CHECK(critical_q(2.0, 4) == 2.0);
  CHECK(critical_q(2.0, 3) == 1.5);
  CHECK(sphere_area(2) == Catch::Approx(2 * pi));
  CHECK(sphere_area(3) == Catch::Approx(4 * pi));
  CHECK(sphere_area(4) == Catch::Approx(2 * pi * pi));
  CHECK_THROWS_AS(sphere_area(5), DomainError);
  CHECK_THROWS_AS(make_profile(3.0, 3, 0.3), DomainError);
  CHECK_THROWS_AS(make_profile(3.0, 3, 0.0), DomainError);
}

TEST_CASE("cutoff properties", "[counterexample]") {
  const CutoffProfile chi;
  CHECK(chi.chi(0.5) == 0.0);
  CHECK(chi.chi(1.0) == 0.0);
  CHECK(chi.chi(2.0) == 1.0);
  CHECK(chi.chi(7.0) == 1.0);
  CHECK(chi.chi(1.5) == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(chi.chi_prime(0.5) == 0.0);
  CHECK(chi.chi_prime(2.5) == 0.0);
  double prev = 0.0;
  for (int i = 1; i < 200; ++i) {
    const double t = 1.0 + i / 200.0;
    CHECK(chi.chi(t) >= prev);
    CHECK(chi.chi(t) + chi.chi(3.0 - t) == Catch::Approx(1.0).epsilon(1e-14));
    const double h = 1e-6;
    CHECK(chi.chi_prime(t) == Catch::Approx((chi.chi(t + h) - chi.chi(t - h)) / (2 * h)).margin(1e-7));
    prev = chi.chi(t);
  }
  const CutoffProfile sharp(CutoffProfile::Kind::sharp);
  CHECK(sharp.chi(0.999) == 0.0);
  CHECK(sharp.chi(1.0) == 1.0);
  CHECK_THROWS_AS(sharp.chi_prime(1.5), DomainError);
}

TEST_CASE("profile sign and monotonicity", "[counterexample]") {
  // c < 0, so v <= 0 and v increases towards the boundary value v(1/2) = 0.
  const RadialProfile prof = make_profile(3.0, 3, 1.0 / 16);
  double prev = -INFINITY;
  for (double r : log_radii(0.01, 0.5, 60)) {
    const ProfileValues pv = profile_eval(prof, r);
    CHECK(pv.v <= 0.0);
    CHECK(pv.v >= prev);
    CHECK(pv.v1 >= 0.0);
    prev = pv.v;
  }
  CHECK(profile_eval(prof, 0.5).v == 0.0);
  // Inside the cutoff v is constant and f vanishes.
  const ProfileValues core = profile_eval(prof, 0.03);
  CHECK(core.v1 == 0.0);
  CHECK(core.f == 0.0);
  CHECK(core.v == Catch::Approx(profile_eval(prof, 0.05).v).epsilon(1e-12));
  CHECK_THROWS_AS(profile_eval(prof, 0.0), DomainError);
  CHECK_THROWS_AS(profile_eval(prof, 0.6), DomainError);
}

TEST_CASE("v outside the cutoff has a closed form", "[counterexample]") {
  // For r >= 2 eps, v = c ((1/2)^(1-a) - r^(1-a)) / (1 - a) with a = 1/(gamma-1).
  const RadialProfile prof = make_profile(3.0, 3, 1.0 / 32);
  const double a = 0.5, c = prof.c;
  for (double r : {0.07, 0.1, 0.2, 0.4}) {
    const double exact = c * (std::pow(0.5, 1 - a) - std::pow(r, 1 - a)) / (1 - a);
    CHECK(profile_eval(prof, r).v == Catch::Approx(exact).epsilon(1e-11));
  }
}

TEST_CASE("radial residual is at round-off", "[counterexample]") {
  for (double eps : dyadic_eps()) {
    const RadialProfile prof = make_profile(3.0, 3, eps);
    const auto r = log_radii(eps / 4, 0.49, 400);
    CHECK(radial_residual(prof, r) <= 1e-10);
  }
  const RadialProfile p2 = make_profile(2.5, 2, 0.1);
  CHECK(radial_residual(p2, log_radii(0.02, 0.49, 200)) <= 1e-10);
}

TEST_CASE("critical norm of f is independent of eps", "[counterexample]") {
  const double q = critical_q(3.0, 3);
  const double ref = ball_norms(make_profile(3.0, 3, 1.0 / 16), q).norm_f;
  CHECK(ref > 0.0);
  for (double eps : dyadic_eps()) {
    const BallNorms b = ball_norms(make_profile(3.0, 3, eps), q);
    CHECK(std::abs(b.norm_f - ref) <= 1e-8 * ref);
    CHECK(b.achieved_tol <= 1e-9);
  }
}

TEST_CASE("sharp cutoff has a logarithmic closed form", "[counterexample]") {
  // |Dv|^(gamma q) = |c|^(gamma q) r^(-d) on [eps, 1/2]: the norm^q is |c|^6 4 pi ln(1/(2 eps)).
  for (double eps : {1.0 / 16, 1.0 / 128}) {
    const BallNorms b = ball_norms(make_profile(3.0, 3, eps, CutoffProfile::Kind::sharp), 2.0);
    CHECK(std::isnan(b.norm_f));
    CHECK(std::pow(b.norm_grad_pow, 2.0) ==
          Catch::Approx(std::pow(1.5, 3) * 4 * pi * std::log(1 / (2 * eps))).epsilon(1e-9));
  }
}

TEST_CASE("logarithmic divergence slope", "[counterexample]") {
  const auto eps = dyadic_eps();
  const NormTable t = norm_table(3.0, 3, 2.0, eps);
  REQUIRE(t.rows.size() == 6);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].eps < t.rows[i - 1].eps);
    CHECK(t.rows[i].norm_grad_pow > t.rows[i - 1].norm_grad_pow);
  }
  const DivergenceFit fit = divergence_fit(t);
  const double derived = std::pow(1.5, 3) * 4 * pi;
  CHECK(std::abs(fit.slope - derived) <= 0.02 * derived);
  CHECK(std::abs(fit.slope - derived) <= 1e-8 * derived);
  CHECK(fit.max_relative_residual <= 0.02);
}

TEST_CASE("threaded table equals the serial one", "[counterexample]") {
  const auto eps = dyadic_eps();
  const NormTable serial = norm_table(3.0, 3, 2.0, eps);
  const NormTable threaded = norm_table(3.0, 3, 2.0, eps, {}, 3);
  REQUIRE(serial.rows.size() == threaded.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].norm_grad_pow == threaded.rows[i].norm_grad_pow);
    CHECK(serial.rows[i].norm_f == threaded.rows[i].norm_f);
  }
}

TEST_CASE("supercritical q breaks the logarithmic law", "[counterexample]") {
  const NormTable t = norm_table(3.0, 3, critical_q(3.0, 3) + 0.5, dyadic_eps());
  CHECK(divergence_fit(t).max_relative_residual > 0.02);
}

TEST_CASE("divergence fit on synthetic rows", "[counterexample]") {
  NormTable t;
  for (double eps : {0.25, 0.125, 0.0625, 0.03125}) {
    const double target = 2.0 + 3.0 * std::log(1 / eps);
    t.rows.push_back({eps, 2.0, 1.0, std::sqrt(target), 0.0});
  }
  const DivergenceFit fit = divergence_fit(t);
  CHECK(fit.slope == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(fit.intercept == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(fit.max_relative_residual <= 1e-12);

  NormTable few = t;
  few.rows.pop_back();
  CHECK_THROWS_AS(divergence_fit(few), DomainError);
  NormTable mixed = t;
  mixed.rows.back().q = 3.0;
  CHECK_THROWS_AS(divergence_fit(mixed), DomainError);
}

TEST_CASE("quadrature depth doubling changes nothing", "[counterexample]") {
  const RadialProfile prof = make_profile(3.0, 3, 1.0 / 256);
  const BallNorms a = ball_norms(prof, 2.0, QuadratureOptions{1e-9, 20});
  const BallNorms b = ball_norms(prof, 2.0, QuadratureOptions{1e-9, 40});
  CHECK(std::abs(a.norm_f - b.norm_f) <= 1e-9 * a.norm_f);
  CHECK(std::abs(a.norm_grad_pow - b.norm_grad_pow) <= 1e-9 * a.norm_grad_pow);
}

TEST_CASE("norm table CSV layout", "[counterexample]") {
  const NormTable t = norm_table(3.0, 3, 2.0, dyadic_eps());
  const DivergenceFit fit = divergence_fit(t);
  const CsvTable csv = parse_csv(norm_table_csv(t, &fit, 3e-16));
  CHECK(csv.header == std::vector<std::string>{"eps", "q", "norm_f", "norm_grad_pow", "quad_tol"});
  REQUIRE(csv.rows.size() == 6);
  CHECK(csv.rows[0][3] == t.rows[0].norm_grad_pow);
  REQUIRE(csv.comments.size() == 4);
  CHECK_THAT(csv.comments[0], Catch::Matchers::ContainsSubstring("slope="));
  CHECK_THAT(csv.comments[3], Catch::Matchers::ContainsSubstring("radial_residual_max="));
}
