#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "harperlab/config.hpp"
#include "harperlab/errors.hpp"
#include "harperlab/moran.hpp"

using namespace harperlab;

namespace {

const double kToyDim = std::log(2.0) / std::log(10.0);

// Level-n intervals of the two-map set with ratio c at both ends of [0,1],
// built by repeated substitution.
std::vector<Interval> toy_oracle(std::size_t n, double c) {
  std::vector<Interval> cur{{0.0, 1.0}};
  for (std::size_t d = 0; d < n; ++d) {
    std::vector<Interval> next;
    for (const auto& v : cur) {
      const double L = v.length();
      next.push_back({v.lo, v.lo + c * L});
      next.push_back({v.hi - c * L, v.hi});
    }
    cur = std::move(next);
  }
  return cur;
}

ExpansionRule bad_rule() {
  ExpansionRule rule;
  rule.expand = [](const Word& w, Interval, std::size_t, std::uint64_t) {
    Expansion e;
    if (w.size() == 1 && w.letters[0].local == 1) {
      e.runs = {{0.0, std::log(0.08), 0.0, 1}, {0.05, std::log(0.05), 0.0, 1}};
    } else {
      e.runs = {{0.0, std::log(0.1), 0.0, 1}, {0.9, std::log(0.1), 0.0, 1}};
    }
    e.blocks = {Block{0, 2, {0.0, 1.0}, 0}};
    return e;
  };
  return rule;
}

}  // namespace

TEST_SUITE("moran") {
  TEST_CASE("word text and prefixes") {
    Word a{2, {{1, 0}, {1, -3}}};
    CHECK(a.str() == "2/1:0/1:-3");
    CHECK(a.type() == 1);
    Word b{2, {{1, 0}}};
    CHECK(b.is_prefix_of(a));
    CHECK_FALSE(a.is_prefix_of(b));
    CHECK(Word{2, {}}.type() == 2);
  }

  TEST_CASE("toy prefractal matches substitution") {
    const auto nc = NestedCovering::build(toy_rule(2, 0.1), 4, 1);
    for (std::size_t n = 0; n <= 4; ++n) {
      const auto pf = prefractal(nc, n);
      const auto want = toy_oracle(n, 0.1);
      REQUIRE(pf.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(pf[i].lo == doctest::Approx(want[i].lo).epsilon(1e-12));
        CHECK(pf[i].hi == doctest::Approx(want[i].hi).epsilon(1e-12));
      }
      CHECK(static_cast<double>(nc.level_counts()[n]) == std::ldexp(1.0, static_cast<int>(n)));
    }
    CHECK(nc.max_ratio() == doctest::Approx(0.1));
  }

  TEST_CASE("toy certificate at the similarity dimension") {
    const auto nc = NestedCovering::build(toy_rule(2, 0.1), 3, 1);
    const auto hc = hausdorff_certificate(nc, kToyDim);
    CHECK(hc.holds);
    for (double s : hc.level_sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(hausdorff_certificate(nc, 0.9 * kToyDim).holds);
    CHECK(hausdorff_certificate(nc, 0.9 * kToyDim).max_child_sum > 1.0);
  }

  TEST_CASE("toy adapted cover") {
    const auto nc = NestedCovering::build(toy_rule(2, 0.1), 3, 1);
    const auto cov = adapted_cover(nc, 0.015);
    REQUIRE(cov.size() == 2);
    CHECK(cov[0].word.str() == "2/1:0");
    CHECK(cov[1].word.str() == "2/1:1");
    CHECK(cov[0].interval.length() == doctest::Approx(0.1));
    CHECK_THROWS_AS(adapted_cover(nc, 1.5), DepthInsufficientError);
    CHECK_THROWS_AS(adapted_cover(nc, 1e-6), DepthInsufficientError);
  }

  TEST_CASE("tree box count equals sweep on the materialized set") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      const auto nc = NestedCovering::build(random_rule(5, 1e-3), 3, seed);
      const auto pf = prefractal(nc, 3);
      for (double r : {0.3, 0.05, 1e-2, 3e-3, 1e-4, 1e-6}) {
        CAPTURE(seed);
        CAPTURE(r);
        CHECK(prefractal_box_count(nc, 3, r, 0.0) == box_count(pf, r));
      }
    }
    const auto toy = NestedCovering::build(toy_rule(3, 0.2), 5, 1);
    for (double r : {0.1, 0.01, 1e-3, 1e-4})
      CHECK(prefractal_box_count(toy, 5, r) == box_count(prefractal(toy, 5), r));
  }

  TEST_CASE("random covers are antichains covering the prefractal") {
    for (std::uint64_t seed = 10; seed < 30; ++seed) {
      const auto nc = NestedCovering::build(random_rule(6, 1e-2), 4, seed);
      const double r = 1e-3;
      std::vector<CoverElement> cov;
      try {
        cov = adapted_cover(nc, r);
      } catch (const DepthInsufficientError&) {
        continue;
      }
      std::set<std::string> seen;
      for (std::size_t i = 0; i < cov.size(); ++i) {
        CHECK(cov[i].interval.length() > r);
        CHECK(std::exp(cov[i].min_child_log_len) <= r * (1 + 1e-12));
        for (std::size_t j = 0; j < cov.size(); ++j)
          if (i != j) CHECK_FALSE(cov[i].word.is_prefix_of(cov[j].word));
      }
      std::vector<Interval> hulls;
      for (const auto& u : cov) hulls.push_back(u.interval);
      CHECK(is_subset(prefractal(nc, 4), BandSet::from_sorted(hulls), 1e-12));
      const auto bb = box_bound(nc, 1.0, r);
      CHECK(bb.box_count <= bb.direct_bound);
    }
  }

  TEST_CASE("structure violation names the word") {
    try {
      NestedCovering::build(bad_rule(), 2, 1);
      FAIL("expected a structure violation");
    } catch (const StructureViolationError& e) {
      CHECK(e.word() == "2/1:1");
    }
  }

  TEST_CASE("type-1 nodes must have one block") {
    ExpansionRule rule;
    rule.kappa = 2;
    rule.sharing = ExpansionRule::Sharing::PerLevelType;
    rule.expand = [](const Word&, Interval, std::size_t, std::uint64_t) {
      Expansion e;
      e.runs = {{0.0, std::log(0.1), 0.3, 3}, {0.8, std::log(0.1), 0.0, 1}};
      e.blocks = {Block{0, 1, {0.0, 0.7}, 1}, Block{1, 2, {0.8, 0.9}, 3}};
      return e;
    };
    CHECK_THROWS_AS(NestedCovering::build(rule, 2, 1), StructureViolationError);
    CHECK_NOTHROW(NestedCovering::build(rule, 1, 1));
  }

  TEST_CASE("standard trees below the threshold") {
    const auto p = ConfigParams{};
    const double delta = 0.8;
    const auto th = h_threshold(delta, 2, 0.5, p);
    const auto rule = standard_rule(p, 2, 0.5, [&](std::size_t) { return th.h; });
    const auto nc = NestedCovering::build(rule, 3, 7, {-4.0, 4.0});
    CHECK(nc.max_ratio() <= 0.1);
    const auto hc = hausdorff_certificate(nc, delta);
    CHECK(hc.holds);
    for (std::size_t n = 1; n < hc.level_sums.size(); ++n)
      CHECK(hc.level_sums[n] <= hc.level_sums[n - 1] * (1 + 1e-12));
    CHECK(static_cast<double>(nc.level_counts()[3]) > 1e9);

    // One level is small enough to compare with the explicit sweep.
    const auto pf1 = prefractal(nc, 1);
    for (double r : {1e-2, 1e-4, 1e-6})
      CHECK(prefractal_box_count(nc, 1, r, 0.0) == box_count(pf1, r));

    const auto bb = box_bound(nc, delta, 1e-5);
    CHECK(bb.holds);
    CHECK(bb.cover_size >= 1);
  }

  TEST_CASE("same seed, same tree") {
    const auto rule = standard_rule(ConfigParams{}, 2, 0.5, [](std::size_t) { return 2e-3; });
    const auto a = list_nodes(NestedCovering::build(rule, 2, 99), 2, 1e-6);
    const auto b = list_nodes(NestedCovering::build(rule, 2, 99), 2, 1e-6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].word == b[i].word);
      CHECK(a[i].lo == b[i].lo);
      CHECK(a[i].hi == b[i].hi);
    }
    const auto r1 = NestedCovering::build(random_rule(4, 1e-2), 3, 5);
    const auto r2 = NestedCovering::build(random_rule(4, 1e-2), 3, 5);
    CHECK(prefractal(r1, 3) == prefractal(r2, 3));
  }
}
