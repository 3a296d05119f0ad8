#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "harperlab/chambers.hpp"
#include "harperlab/cyclic_jacobi.hpp"
#include "harperlab/errors.hpp"

namespace harperlab {

namespace {

namespace mp = boost::multiprecision;

template <unsigned Digits>
using Mp = mp::number<mp::mpfr_float_backend<Digits>, mp::et_off>;

// Carrier for brackets between passes; as precise as the finest pass.
using Wide = Mp<135>;

struct Bracket {
  Wide lo;
  Wide hi;
};

// Separates eigenvalues k and k+1 of one real Bloch matrix at the precision
// of T and returns their distance if it exceeds what this precision can
// resolve. Count errors grow like the square root of the working epsilon
// near a degenerate pair, hence tolerance 2^{-0.45 bits} for bisection and
// 2^{-0.40 bits} for calling two eigenvalues distinct.
template <class T>
std::optional<Wide> pair_gap(const RationalFrequency& f, bool shifted, double corner, std::size_t k,
                             Bracket& bk, Bracket& bk1, int bits) {
  const T pi = boost::math::constants::pi<T>();
  const T th = shifted ? T(1) / (2 * T(f.q)) : T(0);
  std::vector<T> diag(static_cast<std::size_t>(f.q));
  for (std::int64_t j = 0; j < f.q; ++j)
    diag[static_cast<std::size_t>(j)] = 2 * cos(2 * pi * (th + T((j * f.p) % f.q) / T(f.q)));
  const T c(corner);
  const T floor = ldexp(T(1), -8 * bits);
  auto count = [&](const T& x) {
    return cyclic_jacobi_count_below_t<T>(std::span<const T>(diag), c, x, floor);
  };
  const T tol = ldexp(T(1), -static_cast<int>(0.45 * bits));
  const T sep = ldexp(T(1), -static_cast<int>(0.40 * bits));

  // Restore the bracket invariant count(lo) <= k < k+2 <= count(hi); the
  // incoming bracket came from a coarser pass and may be slightly off.
  T lo(bk.lo), hi(bk1.hi);
  T step = hi - lo > tol ? T(hi - lo) : tol;
  for (int i = 0; count(lo) > k && i < 200; ++i, step *= 4) lo -= step;
  step = hi - lo > tol ? T(hi - lo) : tol;
  for (int i = 0; count(hi) < k + 2 && i < 200; ++i, step *= 4) hi += step;
  if (count(lo) > k || count(hi) < k + 2)
    throw EigenSolverError(f.p, f.q, "gap certification lost its bracket");

  // Search for a separator s with exactly k+1 eigenvalues below it.
  std::optional<T> split;
  while (hi - lo > tol) {
    const T mid = (lo + hi) / 2;
    const auto n = count(mid);
    if (n <= k) {
      lo = mid;
    } else if (n >= k + 2) {
      hi = mid;
    } else {
      split = mid;
      break;
    }
  }
  if (!split) {
    bk = bk1 = {Wide(lo), Wide(hi)};
    return std::nullopt;
  }

  // Eigenvalue k lies in (lo0, hi0], eigenvalue k+1 in (lo1, hi1]. Refine
  // both until they are small against the certified separation.
  T lo0 = lo, hi0 = *split, lo1 = *split, hi1 = hi;
  for (int it = 0; it < 4 * bits; ++it) {
    const T gap = lo1 - hi0;
    const bool done0 = hi0 - lo0 <= gap / 1000 || hi0 - lo0 <= tol;
    const bool done1 = hi1 - lo1 <= gap / 1000 || hi1 - lo1 <= tol;
    if (done0 && done1) break;
    if (!done0) {
      const T mid = (lo0 + hi0) / 2;
      (count(mid) > k ? hi0 : lo0) = mid;
    }
    if (!done1) {
      const T mid = (lo1 + hi1) / 2;
      (count(mid) > k + 1 ? hi1 : lo1) = mid;
    }
  }
  bk = {Wide(lo0), Wide(hi0)};
  bk1 = {Wide(lo1), Wide(hi1)};
  const Wide width = (bk1.lo + bk1.hi) / 2 - (bk.lo + bk.hi) / 2;
  if (width > Wide(sep)) return width;
  return std::nullopt;
}

}  // namespace

std::vector<GapReport> certified_gaps(const RationalFrequency& f, double threshold) {
  if (f.q < 2) return {};
  const std::size_t q = static_cast<std::size_t>(f.q);
  // Eigenvalues of the two real Bloch matrices. Matrix 0: theta = 0,
  // corner +1 (roots of Delta = +4); matrix 1: theta = 1/(2q), corner -1.
  const double corner[2] = {1.0, -1.0};
  std::vector<double> ev[2];
  for (int m = 0; m < 2; ++m) {
    const double theta = m == 0 ? 0.0 : 0.5 / static_cast<double>(f.q);
    std::vector<double> d(q);
    for (std::size_t j = 0; j < q; ++j) {
      const auto r = (static_cast<std::int64_t>(j) * f.p) % f.q;
      d[j] = 2.0 * std::cos(2.0 * std::numbers::pi *
                            (theta + static_cast<double>(r) / static_cast<double>(f.q)));
    }
    ev[m] = cyclic_jacobi_eigenvalues(d, corner[m]);
  }

  std::vector<GapReport> out;
  for (std::size_t l = 0; l + 1 < q; ++l) {
    // The gap after band l lies between eigenvalues l and l+1 of the
    // matrix that supplies the upper edge of band l.
    const int m = upper_edge_is_plus(f, l) ? 0 : 1;
    const double lo_edge = ev[m][l], hi_edge = ev[m][l + 1];
    GapReport g{l, hi_edge - lo_edge, 53, true};
    if (g.width >= threshold) {
      out.push_back(g);
      continue;
    }
    const double pad = 1e-8;
    Bracket bk{Wide(lo_edge - pad), Wide(lo_edge + pad)};
    Bracket bk1{Wide(hi_edge - pad), Wide(hi_edge + pad)};
    const bool shifted = m == 1;
    std::optional<Wide> w = pair_gap<Mp<77>>(f, shifted, corner[m], l, bk, bk1, 256);
    g.bits = 256;
    if (!w) {
      w = pair_gap<Mp<135>>(f, shifted, corner[m], l, bk, bk1, 448);
      g.bits = 448;
    }
    if (w) {
      g.width = static_cast<double>(*w);
    } else {
      g.resolved = false;
      g.width = std::ldexp(1.0, -static_cast<int>(0.40 * 448));
    }
    out.push_back(g);
  }
  return out;
}

}  // namespace harperlab
