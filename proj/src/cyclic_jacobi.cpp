#include "harperlab/cyclic_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <lapacke.h>

#include "harperlab/errors.hpp"

namespace harperlab {

namespace {

// Smallest magnitude allowed for an LDL pivot; a zero pivot is nudged so
// the count stays well defined (standard practice for Sturm sequences).
constexpr double kPivotFloor = 1e-300;

std::vector<double> small_case(std::span<const double> d, double c) {
  const std::size_t q = d.size();
  if (q == 1) return {d[0] + 2.0 * c};
  // q == 2
  const double off = 1.0 + c;
  const double m = 0.5 * (d[0] + d[1]);
  const double r = std::hypot(0.5 * (d[0] - d[1]), off);
  return {m - r, m + r};
}

}  // namespace

std::vector<double> cyclic_jacobi_eigenvalues(std::span<const double> diag, double c) {
  const std::size_t q = diag.size();
  if (q == 0) throw ValidationError("cyclic Jacobi matrix must be at least 1x1");
  if (q <= 2) return small_case(diag, c);

  // perm[pos] = original index at position pos.
  std::vector<std::size_t> perm(q), where(q);
  for (std::size_t m = 0, pos = 0; pos < q; ++m) {
    perm[pos++] = m;
    if (pos < q) perm[pos++] = q - 1 - m;
  }
  for (std::size_t pos = 0; pos < q; ++pos) where[perm[pos]] = pos;

  constexpr lapack_int kd = 2, ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * q, 0.0);
  // Upper band storage, column major: A(i, j) at ab[kd + i - j + j*ldab].
  auto set = [&](std::size_t a, std::size_t b, double v) {
    std::size_t i = where[a], j = where[b];
    if (i > j) std::swap(i, j);
    ab[kd + i - j + j * ldab] += v;
  };
  for (std::size_t j = 0; j < q; ++j) set(j, j, diag[j]);
  for (std::size_t j = 0; j + 1 < q; ++j) set(j, j + 1, 1.0);
  set(0, q - 1, c);

  std::vector<double> w(q);
  const lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'U',
                                        static_cast<lapack_int>(q), kd, ab.data(),
                                        ldab, w.data(), nullptr, 1);
  if (info != 0)
    throw EigenSolverError(0, static_cast<std::int64_t>(q),
                           "dsbev returned info=" + std::to_string(info));
  return w;
}

std::size_t cyclic_jacobi_count_below(std::span<const double> diag, double c, double x) {
  const std::size_t q = diag.size();
  if (q <= 2) {
    const auto ev = small_case(diag, c);
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(),
                                                   [x](double e) { return e < x; }));
  }
  return cyclic_jacobi_count_below_t<double>(diag, c, x, kPivotFloor);
}

std::vector<double> cyclic_jacobi_eigenvalues_sturm(std::span<const double> diag,
                                                    double c, double tol) {
  const std::size_t q = diag.size();
  if (q == 0) throw ValidationError("cyclic Jacobi matrix must be at least 1x1");
  if (q <= 2) return small_case(diag, c);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double d : diag) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  // Gershgorin: each row has off-diagonal mass at most 1 + 1.
  const double radius = 1.0 + std::max(1.0, std::abs(c));
  lo -= radius + 1e-9;
  hi += radius + 1e-9;

  std::vector<double> out(q);
  for (std::size_t k = 0; k < q; ++k) {
    // k-th eigenvalue (0-based): smallest x with count_below(x) > k.
    double a = lo, b = hi;
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (cyclic_jacobi_count_below(diag, c, mid) > k)
        b = mid;
      else
        a = mid;
    }
    out[k] = 0.5 * (a + b);
    lo = a;  // eigenvalues are ascending
  }
  return out;
}

}  // namespace harperlab
