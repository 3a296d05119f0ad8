#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace harperlab {

// Real symmetric q x q matrix with diagonal d_j, unit off-diagonals and a
// real corner entry c coupling indices 0 and q-1. For q = 2 the two
// couplings add (off-diagonal 1 + c); for q = 1 the matrix is the scalar
// d_0 + 2c. These are the Bloch matrices at the real Bloch phases k with
// e^{iqk} = c = +-1.

// All eigenvalues in ascending order. The cyclic index order
// 0, q-1, 1, q-2, ... makes the matrix pentadiagonal, which the banded
// LAPACK solver handles in O(q^2). Throws EigenSolverError(0, q, ...) on
// non-convergence; callers rethrow with their own (p, q).
std::vector<double> cyclic_jacobi_eigenvalues(std::span<const double> diag, double c);

// Reference solver: bisection on an exact inertia count. Slower (about
// 60 q^2 operations) but independent of LAPACK; used as a test oracle.
std::vector<double> cyclic_jacobi_eigenvalues_sturm(std::span<const double> diag,
                                                    double c, double tol = 1e-14);

// Number of eigenvalues strictly below x.
std::size_t cyclic_jacobi_count_below(std::span<const double> diag, double c, double x);

// The same count in any ordered field type (used with multiprecision
// floats to separate eigenvalues closer than double resolution). For
// q >= 3 it runs LDL^T elimination in natural order: the corner turns the factor
// into an arrow, row i keeps a fill entry f_i coupling it to the last
// index, and the last pivot collects -sum f_i^2 / d_i.
template <class T>
std::size_t cyclic_jacobi_count_below_t(std::span<const T> diag, const T& c, const T& x,
                                        const T& pivot_floor) {
  using std::abs;
  using std::sqrt;
  const std::size_t q = diag.size();
  if (q == 1) return diag[0] + 2 * c < x ? 1 : 0;
  if (q == 2) {
    const T m = (diag[0] + diag[1]) / 2, h = (diag[0] - diag[1]) / 2, off = 1 + c;
    const T r = sqrt(h * h + off * off);
    return (m - r < x ? 1 : 0) + (m + r < x ? 1 : 0);
  }
  auto safe = [&](T d) {
    if (abs(d) < pivot_floor) return d < 0 ? T(-pivot_floor) : pivot_floor;
    return d;
  };
  std::size_t count = 0;
  T d = safe(diag[0] - x);
  T f = c;
  T last = diag[q - 1] - x;
  for (std::size_t i = 0;; ++i) {
    if (d < 0) ++count;
    last -= f * f / d;
    if (i + 2 == q) break;
    T next_d = safe(diag[i + 1] - x - 1 / d);
    f = (i + 2 == q - 1 ? T(1) : T(0)) - f / d;
    d = next_d;
  }
  return count + (last < 0 ? 1 : 0);
}

}  // namespace harperlab
