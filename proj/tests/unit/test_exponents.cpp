#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <random>

#include "hjlab/errors.hpp"
#include "hjlab/exponents.hpp"

using namespace hjlab;
using Rational = boost::multiprecision::cpp_rational;

namespace {

Rational frac(long num, long den) { return Rational(num) / Rational(den); }

struct Tally {
  int total = 0;
  int fallback_d3 = 0;
};

// Draws admissible rational tuples; the first 30 are forced into the d >= 3 fallback branch.
std::vector<BasicExponents<Rational>> random_tuples(std::uint64_t seed, Tally& tally) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_any(1, 6), dim_high(3, 6);
  std::uniform_int_distribution<long> gnum(1, 60), qnum(1, 40), small_g(1, 12);
  std::vector<BasicExponents<Rational>> out;
  while (out.size() < 100) {
    const bool force = out.size() < 30;
    const int d = force ? dim_high(rng) : dim_any(rng);
    const Rational gamma = force ? 1 + frac(small_g(rng), 24) : 1 + frac(gnum(rng), 20);
    const Rational q = 2 + frac(qnum(rng), 8);
    if (!(q > Rational(d) * (gamma - 1) / gamma)) continue;
    auto e = derive_exponents<Rational>(gamma, q, d);
    if (force && !(e.used_fallback)) continue;
    if (e.used_fallback && d >= 3) ++tally.fallback_d3;
    ++tally.total;
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("rational oracle for (3, 4, 3)", "[exponents]") {
  const auto e = derive_exponents<Rational>(Rational(3), Rational(4), 3);
  CHECK_FALSE(e.used_fallback);
  CHECK(e.p == frac(8, 3));
  CHECK(e.delta_max == frac(1, 8));
  CHECK(e.delta == frac(1, 16));
  CHECK(e.beta == frac(47, 17));
  CHECK((e.beta + 1) * 3 == Rational(3) * 4 / (1 + e.delta));
  CHECK(sobolev_match_defect(e) == 0);
  CHECK(eta_split_defect(e) == 0);
  CHECK(beta_eta_defect(e) == 0);
}

TEST_CASE("double path of (3, 4, 3)", "[exponents]") {
  const Exponents e = derive_exponents<double>(3.0, 4.0, 3);
  CHECK(e.p == Catch::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(e.delta == Catch::Approx(0.0625));
  CHECK(e.beta == Catch::Approx(2.7647059).epsilon(1e-7));
  CHECK((e.beta + 1) * 3 == Catch::Approx(11.2941176).epsilon(1e-7));
  CHECK(e.superlevel_exponent == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("fallback branch for (1.2, 2.5, 3)", "[exponents]") {
  const auto e = derive_exponents<Rational>(frac(6, 5), frac(5, 2), 3);
  CHECK(e.p_formula == frac(7, 6));
  CHECK(e.used_fallback);
  CHECK(e.p == frac(9, 4));
  CHECK(sobolev_match_defect(e) > 0);
  CHECK(eta_split_defect(e) == 0);
  CHECK(beta_eta_defect(e) == 0);
  CHECK(e.beta > 1);
}

TEST_CASE("admissibility errors name the violated inequality", "[exponents]") {
  try {
    derive_exponents<double>(3.0, 1.5, 3);
    FAIL("expected an admissibility error");
  } catch (const AdmissibilityError& e) {
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("d(gamma-1)/gamma"));
  }
  CHECK_THROWS_AS(derive_exponents<double>(3.0, 2.0, 3), AdmissibilityError);
  CHECK_THROWS_AS(derive_exponents<double>(2.0, 1.8, 1), AdmissibilityError);
  CHECK_THROWS_AS(derive_exponents<double>(1.0, 4.0, 2), DomainError);
  CHECK_THROWS_AS(derive_exponents<double>(2.0, 4.0, 0), DomainError);
}

TEST_CASE("explicit delta is validated", "[exponents]") {
  CHECK(derive_exponents<double>(3.0, 4.0, 3, 0.1).delta == 0.1);
  CHECK_THROWS_AS(derive_exponents<double>(3.0, 4.0, 3, 0.13), DomainError);
  CHECK_THROWS_AS(derive_exponents<Rational>(Rational(3), Rational(4), 3, Rational(1, 8)), DomainError);
  CHECK_THROWS_AS(derive_exponents<double>(3.0, 4.0, 3, 0.0), DomainError);
  CHECK_THROWS_AS(sobolev_match_defect(derive_exponents<double>(3.0, 4.0, 2)), DomainError);
}

TEST_CASE("low dimensions always take the fallback", "[exponents]") {
  for (int d : {1, 2}) {
    const auto e = derive_exponents<Rational>(Rational(3), Rational(4), d);
    CHECK(e.used_fallback);
    CHECK(e.p == 3);
    CHECK(e.superlevel_exponent == (e.beta + 1) * (1 + e.delta) / (e.gamma * e.q));
    CHECK(e.superlevel_exponent > 0);
    CHECK(e.superlevel_exponent < 1);
  }
}

TEST_CASE("identities hold exactly on 100 random admissible tuples", "[exponents][property]") {
  Tally tally;
  const auto tuples = random_tuples(20261018, tally);
  CHECK(tally.total == 100);
  CHECK(tally.fallback_d3 >= 20);
  for (const auto& e : tuples) {
    INFO("gamma = " << e.gamma << ", q = " << e.q << ", d = " << e.d);
    CHECK(eta_split_defect(e) == 0);
    CHECK(beta_eta_defect(e) == 0);
    CHECK(e.beta > 1);
    CHECK(e.delta > 0);
    CHECK(e.delta < 1);
    CHECK(e.delta * e.p * e.q / (e.q - e.p) < 1);
    CHECK(e.p > 2);
    CHECK(e.p < e.q);
    if (e.d >= 3) {
      if (e.used_fallback) {
        CHECK(sobolev_match_defect(e) > 0);
      } else {
        CHECK(sobolev_match_defect(e) == 0);
      }
    }
  }
}
