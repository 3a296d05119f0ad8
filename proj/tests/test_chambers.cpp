#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "harperlab/chambers.hpp"
#include "harperlab/cyclic_jacobi.hpp"
#include "harperlab/errors.hpp"
#include "harperlab/random.hpp"

using namespace harperlab;

namespace {

const double s2 = std::numbers::sqrt2;
const double s3 = std::numbers::sqrt3;

void check_edges(const std::vector<double>& got, const std::vector<double>& expect) {
  REQUIRE(got.size() == expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - expect[i]) < 1e-10);
}

}  // namespace

TEST_SUITE("chambers") {

TEST_CASE("discriminant closed forms") {
  for (double E = -5; E <= 5; E += 0.37) {
    CHECK(discriminant({0, 1}, E) == doctest::Approx(E).epsilon(1e-12));
    CHECK(std::abs(discriminant({1, 2}, E) - (E * E - 4)) < 1e-10);
    CHECK(std::abs(discriminant({1, 3}, E) - (E * E * E - 6 * E)) < 1e-10);
  }
}

TEST_CASE("discriminant is monic of degree q") {
  for (auto [p, q] : {std::pair{1, 5}, {3, 7}, {5, 13}}) {
    const double E = 1e3;
    CHECK(discriminant({p, q}, E) / std::pow(E, q) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("rescaled transfer product agrees for large q") {
  // Compare with a long double product, unscaled, at moderate q.
  const RationalFrequency f(34, 89);
  for (double E : {-3.9, -1.0, 0.3, 2.7}) {
    long double a = 1, b = 0, c = 0, d = 1;
    const long double th = 0.25L / 89;
    for (int j = 1; j <= 89; ++j) {
      const long double v =
          E - 2 * std::cos(2 * std::numbers::pi_v<long double> * (th + (j * 34 % 89) / 89.0L));
      const long double na = v * a - c, nb = v * b - d;
      c = a;
      d = b;
      a = na;
      b = nb;
    }
    const double want = static_cast<double>(a + d);
    CHECK(discriminant(f, E) == doctest::Approx(want).epsilon(1e-8));
  }
  // Far outside the spectrum at large q the trace overflows cleanly.
  CHECK(std::isinf(discriminant({1, 997}, 4.5)));
}

TEST_CASE("phase invariance of the Chambers relation") {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const auto q = static_cast<std::int64_t>(rng.integer(1, 20));
    std::int64_t p;
    do p = static_cast<std::int64_t>(rng.integer(0, q - 1));
    while (std::gcd(p, q) != 1);
    const RationalFrequency f(p, q);
    const double theta = rng.uniform(), E = rng.uniform(-5, 5);
    const double lhs = transfer_trace(f, E, theta) + 2 * std::cos(2 * std::numbers::pi * q * theta);
    CHECK(std::abs(lhs - discriminant(f, E)) <= 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("band edges: closed forms") {
  CHECK(!edge_convention().swapped);
  check_edges(band_edges({0, 1}), {-4, 4});
  check_edges(band_edges({1, 2}), {-2 * s2, 0, 0, 2 * s2});
  check_edges(band_edges({1, 3}), {-1 - s3, -2, 1 - s3, s3 - 1, 2, 1 + s3});
  check_edges(band_edges({2, 3}), {-1 - s3, -2, 1 - s3, s3 - 1, 2, 1 + s3});
}

TEST_CASE("banded LAPACK path agrees with the dense solver and with bisection") {
  for (std::int64_t q : {3, 4, 5, 8, 13, 21, 34, 55, 89, 144}) {
    for (std::int64_t p = 1; p < q; p += std::max<std::int64_t>(1, q / 5)) {
      if (std::gcd(p, q) != 1) continue;
      const RationalFrequency f(p, q);
      const auto fast = band_edges(f);
      auto dense = bloch_eigenvalues(f, 0.0, 0.0);
      const auto b = bloch_eigenvalues(f, 0.5 / q, std::numbers::pi / q);
      dense.insert(dense.end(), b.begin(), b.end());
      std::sort(dense.begin(), dense.end());
      const auto ref = band_edges_reference(f);
      REQUIRE(fast.size() == dense.size());
      for (std::size_t i = 0; i < fast.size(); ++i) {
        CHECK(std::abs(fast[i] - dense[i]) < 1e-12);
        // Bisection loses digits only at the double eigenvalue E = 0 of
        // even q, where the unpivoted elimination grows its fill entry.
        CHECK(std::abs(fast[i] - ref[i]) < 1e-8);
      }
    }
  }
}

TEST_CASE("inertia count brackets each eigenvalue") {
  const std::vector<double> d{0.3, -1.2, 0.8, 1.9, -0.4, 0.0, 0.7};
  for (double c : {1.0, -1.0, 0.4}) {
    const auto ev = cyclic_jacobi_eigenvalues(d, c);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      CHECK(cyclic_jacobi_count_below(d, c, ev[i] - 1e-9) == i);
      CHECK(cyclic_jacobi_count_below(d, c, ev[i] + 1e-9) == i + 1);
    }
  }
}

TEST_CASE("edges solve Delta = +-4 and midpoints lie inside") {
  for (auto [p, q] : {std::pair{1, 4}, {2, 5}, {3, 8}, {5, 11}, {7, 16}, {8, 21}}) {
    const RationalFrequency f(p, q);
    const auto e = band_edges(f);
    for (double x : e) CHECK(std::abs(std::abs(discriminant(f, x)) - 4) < 1e-8);
    for (std::size_t l = 0; l + 1 < e.size(); l += 2)
      if (e[l + 1] - e[l] > 1e-12) CHECK(std::abs(discriminant(f, 0.5 * (e[l] + e[l + 1]))) < 4);
  }
}

TEST_CASE("Bloch oracle: edge eigenvalues match the dense solver") {
  for (auto [p, q] : {std::pair{1, 3}, {2, 7}, {3, 8}}) {
    const RationalFrequency f(p, q);
    auto a = bloch_eigenvalues(f, 0.0, 0.0);
    auto b = bloch_eigenvalues(f, 0.5 / q, std::numbers::pi / q);
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    check_edges(band_edges(f), a);
  }
}

TEST_CASE("spectra: merges, symmetry and containment") {
  const auto half = spectrum_rational({1, 2});
  REQUIRE(half.size() == 1);
  CHECK(half[0].lo == doctest::Approx(-2 * s2).epsilon(1e-14));
  const auto third = spectrum_rational({1, 3});
  REQUIRE(third.size() == 3);
  CHECK(third[1].lo - third[0].hi == doctest::Approx(3 - s3).epsilon(1e-12));
  CHECK(spectrum_rational({0, 1}).intervals() == std::vector<Interval>{{-4, 4}});
  for (auto [p, q] : {std::pair{3, 7}, {5, 12}, {13, 34}}) {
    const auto s = spectrum_rational({p, q});
    CHECK(hausdorff_distance(s, s.affine(-1, 0)) < 1e-10);
    CHECK(s.hull().lo >= -4);
    CHECK(s.hull().hi <= 4);
  }
}

TEST_CASE("convergent approximations") {
  const auto gold = ContinuedFraction::parse("[(1)]");
  const auto a1 = spectrum_approx(gold, 1);
  CHECK(a1.convergent == RationalFrequency(0, 1));
  CHECK(a1.bands.intervals() == std::vector<Interval>{{-4, 4}});
  const double phi = (std::sqrt(5.0) - 1) / 2;
  CHECK(a1.error_radius == doctest::Approx(6 * std::sqrt(2 * (1 - phi))).epsilon(1e-12));
  double prev = a1.error_radius;
  auto prev_bands = a1.bands;
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto an = spectrum_approx(gold, n);
    CHECK(an.error_radius < prev);
    CHECK(hausdorff_distance(prev_bands, an.bands) <= prev + an.error_radius);
    prev = an.error_radius;
    prev_bands = an.bands;
  }
  CHECK(deepest_convergent(gold, 10000) == 19);  // q_19 = 6765
  CHECK_THROWS_AS(spectrum_approx(gold, 40, 1000), ValidationError);
}

TEST_CASE("butterfly ordering, counts and reflection symmetry") {
  const auto b = butterfly(8);
  std::size_t phi_sum = 0;
  for (std::int64_t q = 1; q <= 8; ++q)
    for (std::int64_t p = 0; p < q; ++p) phi_sum += std::gcd(p, q) == 1;
  CHECK(b.size() == phi_sum);
  CHECK(b.front().freq == RationalFrequency(0, 1));
  CHECK(b[1].freq == RationalFrequency(1, 2));
  for (std::size_t i = 1; i < b.size(); ++i)
    CHECK((b[i - 1].freq.q < b[i].freq.q ||
           (b[i - 1].freq.q == b[i].freq.q && b[i - 1].freq.p < b[i].freq.p)));
  for (const auto& e : b) {
    if (e.freq.p == 0) continue;
    const auto mirror = spectrum_rational({e.freq.q - e.freq.p, e.freq.q});
    CHECK(hausdorff_distance(e.bands, mirror) < 1e-10);
  }
  const auto s = butterfly_serial(8);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(s[i].bands == b[i].bands);
  CHECK_THROWS_AS(RationalFrequency(2, 4), ValidationError);
}

}

TEST_SUITE("chambers") {

TEST_CASE("certified gaps resolve widths below double precision") {
  // Reference widths from an independent 80-digit dense eigensolver.
  const auto g47 = certified_gaps({2, 47});
  double smallest = 1.0;
  for (const auto& g : g47) {
    CHECK(g.resolved);
    smallest = std::min(smallest, g.width);
  }
  CHECK(smallest == doctest::Approx(1.86e-22).epsilon(0.01));
  const auto g59 = certified_gaps({2, 59});
  CHECK(g59.front().width == doctest::Approx(1.58e-28).epsilon(0.01));
  CHECK(g59.front().bits >= 256);
}

TEST_CASE("certified gaps: parity law for small denominators") {
  for (std::int64_t q = 2; q <= 24; ++q) {
    for (std::int64_t p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const auto gaps = certified_gaps({p, q});
      REQUIRE(gaps.size() == static_cast<std::size_t>(q - 1));
      for (const auto& g : gaps) {
        const bool middle = q % 2 == 0 && g.after_band == static_cast<std::size_t>(q / 2 - 1);
        CHECK(g.resolved != middle);
        if (!middle) CHECK(g.width > 0);
      }
    }
  }
}

TEST_CASE("index pairing keeps thin outer bands apart from narrow gaps") {
  // At 2/59 the outermost bands are about 5e-15 wide.
  const auto bands = bands_by_index({2, 59});
  REQUIRE(bands.size() == 59);
  for (std::size_t l = 0; l < bands.size(); ++l) CHECK(bands[l].lo <= bands[l].hi);
  CHECK(bands.front().length() < 1e-13);
}

}
