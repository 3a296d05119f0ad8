#include <doctest.h>

#include <cmath>
#include <numbers>

#include "harperlab/contfrac.hpp"
#include "harperlab/errors.hpp"
#include "harperlab/random.hpp"

using namespace harperlab;

TEST_SUITE("contfrac") {

TEST_CASE("text form round-trips") {
  for (const char* s : {"[1,2,3]", "[(30)]", "[1,2;(3,4)]", "[7]", "[(1,2,3)]"})
    CHECK(ContinuedFraction::parse(s).str() == s);
  CHECK_THROWS_AS(ContinuedFraction::parse("[]"), ValidationError);
  CHECK_THROWS_AS(ContinuedFraction::parse("[1,0,2]"), ValidationError);
  CHECK_THROWS_AS(ContinuedFraction::parse("[1,2"), ValidationError);
  CHECK_THROWS_AS(ContinuedFraction::parse("[1,;(2)]"), ValidationError);
  CHECK_THROWS_AS(ContinuedFraction::parse("[1;()]"), ValidationError);
  CHECK_THROWS_AS(ContinuedFraction::parse("(1)"), ValidationError);
}

TEST_CASE("golden ratio convergents are Fibonacci ratios") {
  const auto cf = ContinuedFraction::parse("[(1)]");
  const auto c = convergents(cf, 30);
  std::uint64_t f0 = 1, f1 = 1;  // q_1 = 1, q_2 = 2 ...
  for (std::size_t k = 0; k < c.size(); ++k) {
    CHECK(c[k].q == f1);
    CHECK(c[k].p == f0);
    const auto t = f0 + f1;
    f0 = f1;
    f1 = t;
  }
  CHECK(cf.value() == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-15));
}

TEST_CASE("finite expansions evaluate to their rational value") {
  const auto cf = ContinuedFraction::parse("[2,3,4]");
  // 1/(2 + 1/(3 + 1/4)) = 13/30
  CHECK(cf.value() == doctest::Approx(13.0 / 30.0).epsilon(1e-15));
  const auto c = convergents(cf, 3).back();
  CHECK(c.p == 13);
  CHECK(c.q == 30);
  CHECK_THROWS_AS(convergents(cf, 4), InsufficientExpansionError);
}

TEST_CASE("Gauss shift and semiclassical parameter") {
  const auto cf = ContinuedFraction::parse("[2;(2)]");
  CHECK(gauss_shift(cf, 1) == ContinuedFraction::parse("[(2)]"));
  CHECK(gauss_shift(ContinuedFraction::parse("[1,2;(3,4)]"), 5) ==
        ContinuedFraction::parse("[(4,3)]"));
  CHECK_THROWS_AS(gauss_shift(ContinuedFraction::parse("[1,2]"), 2),
                  InsufficientExpansionError);
  // [(10)] = sqrt(26) - 5, the positive root of x^2 + 10x - 1.
  const double h1 = semiclassical_h(ContinuedFraction::parse("[(10)]"), 1);
  CHECK(h1 == doctest::Approx(2 * std::numbers::pi * (std::sqrt(26.0) - 5)).epsilon(1e-14));
  CHECK(h1 == doctest::Approx(0.622159).epsilon(1e-6));
  CHECK_THROWS_AS(semiclassical_h(cf, 0), ValidationError);
}

TEST_CASE("Gauss map conjugacy: shift equals {1/alpha}") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::uint64_t> pre(3 + rng.integer(0, 5));
    for (auto& a : pre) a = rng.integer(1, 30);
    const ContinuedFraction cf(pre, {rng.integer(1, 9)});
    const long double x = cf.value_ld();
    const long double gx = 1.0L / x - std::floor(1.0L / x);
    CHECK(std::abs(static_cast<double>(gauss_shift(cf, 1).value_ld() - gx)) < 1e-12);
  }
}

TEST_CASE("log of big integers") {
  BigInt x = 1;
  for (int i = 0; i < 400; ++i) x *= 3;
  CHECK(log_big(x) == doctest::Approx(400 * std::log(3.0)).epsilon(1e-14));
  CHECK(log_big(BigInt(1)) == 0.0);
  CHECK_THROWS_AS(log_big(BigInt(0)), ValidationError);
}

TEST_CASE("beta estimate is the running maximum of log q_{k+1} / q_k") {
  const auto cf = ContinuedFraction::parse("[1,1,100,1]");
  // q = 1, 2, 201, 203
  const double expect = std::max({std::log(2.0) / 1, std::log(201.0) / 2, std::log(203.0) / 201});
  CHECK(beta_estimate(cf, 4) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(beta_estimate(ContinuedFraction::parse("[(1)]"), 40) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("odd anchor insertion") {
  // [1,1]: q_2 = 2 is even.
  const auto cf = ContinuedFraction::parse("[1,1;(5)]");
  const auto a = ensure_odd_anchor(cf, 2);
  CHECK(a.index == 3);
  CHECK(a.cf == ContinuedFraction::parse("[1,1,1;(5)]"));
  CHECK(convergents(a.cf, 3).back().q == 3);
  const auto b = ensure_odd_anchor(cf, 1);  // q_1 = 1 already odd
  CHECK(b.index == 1);
  CHECK(b.cf == cf);
}

TEST_CASE("frequency families") {
  FrequencyFamily f({FamilyKind::F, 3, 2, 2, 11});
  const auto m = f.member(4, 40);
  CHECK(m.quotient(1) == 1);
  CHECK(m.quotient(2) == 2);
  for (std::size_t n = 3; n <= 40; ++n) {
    CHECK(m.quotient(n) >= 3);
    CHECK(m.quotient(n) <= 30);
  }
  CHECK(f.member(4, 40) == m);
  CHECK(f.stream(4)(17) == m.quotient(17));

  FrequencyFamily odd({FamilyKind::FNOdd, 2, 2, 40, 3});
  FrequencyFamily even({FamilyKind::FNEven, 2, 2, 40, 3});
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto o = odd.member(i);
    CHECK(o.prefix().size() == 2);
    CHECK(o.period() == std::vector<std::uint64_t>{40});
    CHECK(o.quotient(1) <= 2);
    CHECK(o.quotient(2) <= 2);
    CHECK(bit_test(convergents(o, 2).back().q, 0));
    const auto e = even.member(i);
    CHECK(e.quotient(3) == 1);
    CHECK(!bit_test(convergents(e, 2).back().q, 0));
  }
  CHECK_THROWS_AS(FrequencyFamily({FamilyKind::F, 1}), ValidationError);
  CHECK_THROWS_AS(FrequencyFamily({FamilyKind::FNOdd, 2, 1}), ValidationError);
}

}
