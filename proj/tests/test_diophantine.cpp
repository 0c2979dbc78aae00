#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "horolab/diophantine.hpp"
#include "horolab/measures.hpp"

using namespace horolab;
using namespace horolab::diophantine;
using Catch::Approx;

namespace {

using Psi = ApproximationFunction;

long double dist_to_int(long double v) { return std::fabs(v - std::nearbyint(v)); }

bool has(const std::vector<RationalApprox>& cv, long p, long q) {
  for (const auto& c : cv) {
    if (c.p == p && c.q == q) return true;
  }
  return false;
}

measures::MeasureExpr cantor450() { return measures::parse_measure("cantor:450:0..446"); }

}  // namespace

TEST_CASE("approximation functions", "[diophantine][psi]") {
  CHECK(Psi::parse("pow:1.5")(4) == Approx(0.125));
  CHECK(Psi::parse("qlogq")(1) == 1.0);
  CHECK(Psi::parse("qlogq")(10) == Approx(1.0 / (10.0 * std::log(10.0))));
  CHECK(Psi::parse("const:0.5")(1000) == 0.5);
  CHECK(Psi::parse("pow:1").divergent());
  CHECK_FALSE(Psi::parse("pow:2").divergent());
  CHECK(Psi::parse("qlogq").divergent());
  CHECK(Psi::parse("pow:1.5").literal() == "pow:1.5");
  CHECK_THROWS_AS(Psi::parse("exp:1"), ParseError);
  CHECK_THROWS_AS(Psi::parse("pow:-1"), Error);
  CHECK_THROWS_AS(Psi::table({0.5, 0.2, 0.3}), DomainError);
  CHECK(Psi::table({0.5, 0.25})(7) == 0.25);
}

TEST_CASE("continued fraction convergents", "[diophantine][cf]") {
  const auto r = convergents(3.0 / 7.0, 100);
  REQUIRE_FALSE(r.empty());
  CHECK(r.back().p == 3);
  CHECK(r.back().q == 7);
  CHECK(r.back().quality == 0.0);

  const auto golden = convergents((1.0 + std::sqrt(5.0)) / 2.0, 1000);
  std::vector<long> fib = {1, 1};
  while (fib.back() + fib[fib.size() - 2] <= 1000) fib.push_back(fib.back() + fib[fib.size() - 2]);
  std::vector<long> qs;
  for (const auto& c : golden) qs.push_back(c.q);
  CHECK(qs == fib);

  const auto pi = convergents(kPi, 120);
  CHECK(has(pi, 22, 7));
  CHECK(has(pi, 355, 113));
  // exhaustive oracle: each convergent beats every smaller denominator
  for (const auto& c : pi) {
    const long double best = dist_to_int(static_cast<long double>(c.q) * kPi);
    for (long q = 1; q < c.q; ++q) CHECK(dist_to_int(static_cast<long double>(q) * kPi) > best);
  }
  const auto exact = convergents_rational(355, 113, 1000);
  CHECK(exact.back().q == 113);
  CHECK_THROWS_AS(convergents(0.5, 0), DomainError);
}

TEST_CASE("convergents satisfy their bounds exactly", "[diophantine][cf][property]") {
  for (double alpha : {kPi, std::sqrt(2.0), std::exp(1.0), 0.123456789, -2.75}) {
    const auto cv = convergents(alpha, 100'000);
    for (std::size_t i = 0; i < cv.size(); ++i) {
      CHECK(std::gcd(cv[i].p, cv[i].q) == 1);
      if (i + 1 < cv.size()) {
        // |q alpha - p| < 1/q_next, that is |alpha - p/q| < 1/(q q_next)
        CHECK(exact_quality_at_most(alpha, cv[i].p, cv[i].q, 1, cv[i].q * cv[i + 1].q));
        // only a leading partial quotient 1 repeats a denominator
        CHECK((cv[i].q < cv[i + 1].q || (i == 0 && cv[i].q == 1)));
      }
    }
  }
}

TEST_CASE("Dirichlet approximation", "[diophantine][dirichlet]") {
  const auto a = dirichlet_approx(1.0 / 3.0, 10);
  CHECK(a.p == 1);
  CHECK(a.q == 3);
  const auto z = dirichlet_approx(0.0, 5);
  CHECK(z.p == 0);
  CHECK(z.q == 1);

  const double r2 = std::sqrt(2.0);
  const auto d = dirichlet_approx(r2, 100);
  CHECK(d.q <= 100);
  CHECK(exact_quality_at_most(r2, d.p, d.q, 1, d.q * 100));
  // exhaustive: some q <= 100 meets the bound, and the returned one is among them
  bool found = false;
  for (long q = 1; q <= 100; ++q) {
    const long p = std::lround(q * r2);
    if (std::abs(r2 - static_cast<double>(p) / q) <= 1.0 / (100.0 * q)) found = found || (p == d.p && q == d.q);
  }
  CHECK(found);

  for (double alpha : {0.7071, kPi, 1e-7, 0.999999}) {
    for (long Q : {1L, 7L, 1000L, 1'000'000L}) {
      const auto r = dirichlet_approx(alpha, Q);
      CHECK(r.q >= 1);
      CHECK(r.q <= Q);
      CHECK(std::gcd(r.p, r.q) == 1);
      CHECK(exact_quality_at_most(alpha, r.p, r.q, 1, r.q * Q));
    }
  }
}

TEST_CASE("measure of approximation sets", "[diophantine][Aq]") {
  const auto leb = measures::parse_measure("leb");
  const auto a = measure_of_Aq(leb, 10, Psi::power(1.5), 200'000, 1);
  CHECK(std::abs(a.value - 2.0 * std::pow(10.0, -1.5)) <= 3.0 * a.error);

  const auto one = measure_of_Aq(cantor450(), 7, Psi::constant(0.7), 1000, 2);
  CHECK(one.value == 1.0);
  CHECK(one.error == 0.0);

  // Dirac atom at 1/2: q odd misses by exactly 1/2
  CHECK(measure_of_Aq(measures::parse_measure("dirac:0.5"), 3, Psi::constant(0.5), 1000, 3).value == 0.0);
  CHECK(measure_of_Aq(measures::parse_measure("dirac:0.5"), 4, Psi::constant(0.5), 1000, 3).value == 1.0);

  double ratio = 0.0;
  for (long q = 2; q <= 100; ++q) ratio += measure_of_Aq(cantor450(), q, Psi::power(1.0), 20'000, 100 + q).value * q / 2.0;
  CHECK(ratio / 99.0 == Approx(1.0).epsilon(0.15));

  CHECK_THROWS_AS(measure_of_Aq(leb, 0, Psi::power(1.0), 1000, 1), DomainError);
  CHECK_THROWS_AS(measure_of_Aq(leb, 2, Psi::power(1.0), 999, 1), DomainError);
}

TEST_CASE("approximation-set measure is monotone in psi", "[diophantine][Aq][property]") {
  for (const auto& m : {measures::parse_measure("leb"), cantor450()}) {
    for (long q : {5L, 20L, 80L}) {
      const auto small = measure_of_Aq(m, q, Psi::power(1.5), 100'000, 7);
      const auto large = measure_of_Aq(m, q, Psi::power(1.1), 100'000, 7);
      CHECK(large.value - small.value > 3.0 * std::hypot(small.error, large.error));
    }
  }
}

TEST_CASE("Khintchine profiles", "[diophantine][khintchine]") {
  const auto leb = measures::parse_measure("leb");
  SECTION("divergent harmonic series") {
    const auto p = khintchine_profile(leb, Psi::power(1.0), 10'000, 20'000, 11);
    CHECK(p.divergent);
    CHECK(p.mean_count == Approx(p.comparison).epsilon(0.10));
    CHECK(p.comparison == Approx(2.0 * (khintchine_sum(Psi::power(1.0), 10'000) + 1.0)).epsilon(1e-12));
    CHECK(p.checkpoints == std::vector<long>{10, 100, 1000, 10'000});
    CHECK(p.mean_count_at(10'000) == Approx(p.mean_count).epsilon(1e-12));
  }
  SECTION("convergent series plateaus") {
    const auto p = khintchine_profile(leb, Psi::power(2.0), 10'000, 20'000, 12);
    CHECK_FALSE(p.divergent);
    const double diff = p.checkpoint_mean[3] - p.checkpoint_mean[2];
    CHECK(diff < 3.0 * std::hypot(p.checkpoint_stderr[2], p.checkpoint_stderr[3]));
  }
  SECTION("atom at one half") {
    const auto p = khintchine_profile(measures::parse_measure("dirac:0.5"), Psi::power(1.0), 1000, 10, 13);
    // q = 1 and every even q
    CHECK(p.mean_count == 1.0 + 500.0);
    CHECK(p.mean_count_stderr == 0.0);
  }
  SECTION("agrees with the per-q estimator") {
    const std::size_t N = 50'000;
    const auto p = khintchine_profile(leb, Psi::power(1.0), 100, N, 14);
    for (long q : {2L, 5L, 17L, 64L}) {
      const auto a = measure_of_Aq(leb, q, Psi::power(1.0), N, 1000 + q);
      const double h = p.hit_rate[static_cast<std::size_t>(q - 1)];
      const double se = std::sqrt(h * (1.0 - h) / static_cast<double>(N));
      CHECK(std::abs(h - a.value) <= 3.0 * std::hypot(se, a.error));
    }
  }
  SECTION("determinism") {
    const auto a = khintchine_profile(cantor450(), Psi::qlogq(), 100, 5000, 15);
    const auto b = khintchine_profile(cantor450(), Psi::qlogq(), 100, 5000, 15);
    CHECK(a.hit_rate == b.hit_rate);
  }
  CHECK_THROWS_AS(khintchine_profile(leb, Psi::power(1.0), 9, 100, 1), DomainError);
}

TEST_CASE("Khintchine partial sums", "[diophantine][khintchine]") {
  CHECK(khintchine_sum(Psi::power(2.0), 10'000'000) == Approx(kPi * kPi / 6.0 - 1.0).margin(1e-6));
  CHECK(khintchine_sum(Psi::power(1.0), 1'000'000) == Approx(13.39272622286580696).margin(1e-3));
  CHECK(khintchine_sum(Psi::constant(0.5), 10) == 4.5);
  CHECK_THROWS_AS(khintchine_sum(Psi::power(1.0), 1), DomainError);
}
