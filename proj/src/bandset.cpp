#include "harperlab/bandset.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "harperlab/errors.hpp"

namespace harperlab {

namespace {

void check(const Interval& v) {
  if (!std::isfinite(v.lo) || !std::isfinite(v.hi))
    throw InvalidIntervalError("interval endpoints must be finite");
  if (v.lo > v.hi)
    throw InvalidIntervalError("interval [" + std::to_string(v.lo) + ", " +
                               std::to_string(v.hi) + "] has lo > hi");
}

// Appends v to a sorted, merged output vector.
inline void push_merged(std::vector<Interval>& out, const Interval& v, double tol) {
  if (!out.empty() && v.lo <= out.back().hi + tol) {
    out.back().hi = std::max(out.back().hi, v.hi);
  } else {
    out.push_back(v);
  }
}

// Rows [r0, r1) of the sum table, merged into a single sorted union.
std::vector<Interval> merge_rows(const std::vector<Interval>& a,
                                 const std::vector<Interval>& b, std::size_t r0,
                                 std::size_t r1) {
  struct Head {
    double lo;
    std::size_t row;
    std::size_t col;
  };
  // Ties broken by row so the pop order is fully determined.
  auto later = [](const Head& x, const Head& y) {
    return x.lo > y.lo || (x.lo == y.lo && x.row > y.row);
  };
  std::priority_queue<Head, std::vector<Head>, decltype(later)> heap(later);
  for (std::size_t i = r0; i < r1; ++i) heap.push({a[i].lo + b[0].lo, i, 0});

  std::vector<Interval> out;
  while (!heap.empty()) {
    const Head h = heap.top();
    heap.pop();
    push_merged(out, {h.lo, a[h.row].hi + b[h.col].hi}, kMergeTolerance);
    if (h.col + 1 < b.size()) heap.push({a[h.row].lo + b[h.col + 1].lo, h.row, h.col + 1});
  }
  return out;
}

}  // namespace

BandSet BandSet::normalize(std::vector<Interval> raw, double tol) {
  for (const auto& v : raw) check(v);
  std::sort(raw.begin(), raw.end(), [](const Interval& x, const Interval& y) {
    return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
  });
  return from_sorted(raw, tol);
}

BandSet BandSet::from_sorted(std::span<const Interval> sorted, double tol) {
  BandSet s;
  s.iv_.reserve(sorted.size());
  for (const auto& v : sorted) {
    check(v);
    push_merged(s.iv_, v, tol);
  }
  return s;
}

Interval BandSet::hull() const {
  if (iv_.empty()) throw EmptySetError("hull of an empty band set");
  return {iv_.front().lo, iv_.back().hi};
}

double BandSet::measure() const noexcept {
  // Neumaier summation; spectra at large q have thousands of tiny bands.
  double sum = 0.0, comp = 0.0;
  for (const auto& v : iv_) {
    const double x = v.length();
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

bool BandSet::contains(double x) const noexcept {
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                             [](double v, const Interval& b) { return v < b.lo; });
  return it != iv_.begin() && std::prev(it)->contains(x);
}

double BandSet::distance(double x) const {
  if (iv_.empty()) throw EmptySetError("distance to an empty band set");
  auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                             [](double v, const Interval& b) { return v < b.lo; });
  double d = INFINITY;
  if (it != iv_.end()) d = it->lo - x;
  if (it != iv_.begin()) d = std::min(d, std::max(0.0, x - std::prev(it)->hi));
  return d;
}

BandSet BandSet::affine(double scale, double shift) const {
  if (scale == 0.0 || !std::isfinite(scale))
    throw ValidationError("affine map needs a finite nonzero scale");
  std::vector<Interval> out;
  out.reserve(iv_.size());
  for (const auto& v : iv_) {
    const double x = scale * v.lo + shift, y = scale * v.hi + shift;
    out.push_back({std::min(x, y), std::max(x, y)});
  }
  if (scale < 0) std::reverse(out.begin(), out.end());
  return from_sorted(out);
}

bool is_subset(const BandSet& a, const BandSet& b, double tol) {
  std::size_t j = 0;
  for (const auto& v : a) {
    while (j < b.size() && b[j].hi + tol < v.lo) ++j;
    if (j == b.size() || b[j].lo - tol > v.lo || b[j].hi + tol < v.hi) return false;
  }
  return true;
}

BandSet minkowski_sum_serial(const BandSet& a, const BandSet& b) {
  if (a.empty() || b.empty()) throw EmptySetError("Minkowski sum of an empty set");
  // Put the shorter operand on the heap side.
  const auto& rows = a.size() <= b.size() ? a.intervals() : b.intervals();
  const auto& cols = a.size() <= b.size() ? b.intervals() : a.intervals();
  const auto merged = merge_rows(rows, cols, 0, rows.size());
  return BandSet::from_sorted(merged);
}

BandSet minkowski_sum(const BandSet& a, const BandSet& b) {
  if (a.empty() || b.empty()) throw EmptySetError("Minkowski sum of an empty set");
  const auto& rows = a.size() <= b.size() ? a.intervals() : b.intervals();
  const auto& cols = a.size() <= b.size() ? b.intervals() : a.intervals();
  constexpr std::size_t kBlock = 64;
  const std::size_t nblocks = (rows.size() + kBlock - 1) / kBlock;
  if (nblocks <= 1) return minkowski_sum_serial(a, b);

  std::vector<std::vector<Interval>> parts(nblocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t k = 0; k < nblocks; ++k) {
    const std::size_t r0 = k * kBlock;
    parts[k] = merge_rows(rows, cols, r0, std::min(rows.size(), r0 + kBlock));
  }

  // Pairwise tree merge of the sorted partial unions, in block order.
  while (parts.size() > 1) {
    std::vector<std::vector<Interval>> next((parts.size() + 1) / 2);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t k = 0; k < next.size(); ++k) {
      if (2 * k + 1 == parts.size()) {
        next[k] = std::move(parts[2 * k]);
        continue;
      }
      const auto& x = parts[2 * k];
      const auto& y = parts[2 * k + 1];
      std::vector<Interval> out;
      out.reserve(x.size() + y.size());
      std::size_t i = 0, j = 0;
      while (i < x.size() || j < y.size()) {
        const bool take_x = j == y.size() || (i < x.size() && x[i].lo <= y[j].lo);
        push_merged(out, take_x ? x[i++] : y[j++], kMergeTolerance);
      }
      next[k] = std::move(out);
    }
    parts = std::move(next);
  }
  return BandSet::from_sorted(parts.front());
}

std::uint64_t box_count(const BandSet& s, double r) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw ValidationError("box_count: r must be a positive finite length");
  if (s.empty()) throw EmptySetError("box_count of an empty set");
  std::uint64_t n = 0;
  double covered = -INFINITY;  // right end of the last placed box
  for (const auto& v : s) {
    if (v.hi <= covered) continue;
    const double x = std::max(v.lo, covered);
    // Boxes [x, x+r], [x+r, x+2r], ... reach hi after ceil((hi-x)/r) steps;
    // the slack absorbs rounding in exact tilings such as [0,1] at r = 1/8.
    const double ratio = (v.hi - x) / r;
    double k = std::ceil(ratio - 1e-9);
    if (v.lo > covered) k = std::max(k, 1.0);
    n += static_cast<std::uint64_t>(k);
    covered = x + k * r;
  }
  return n;
}

namespace {

// sup over a in A of dist(a, B). On each interval of A, dist(., B) is
// piecewise linear with maxima at the interval ends or at the midpoints of
// gaps of B, so those are the only candidates.
double directed(const BandSet& a, const BandSet& b) {
  double best = 0.0;
  const auto& bi = b.intervals();
  for (const auto& v : a) {
    best = std::max({best, b.distance(v.lo), b.distance(v.hi)});
    auto it = std::upper_bound(bi.begin(), bi.end(), v.lo,
                               [](double x, const Interval& w) { return x < w.lo; });
    if (it != bi.begin()) --it;
    for (; it != bi.end() && it->hi < v.hi; ++it) {
      if (std::next(it) == bi.end()) break;
      const double mid = 0.5 * (it->hi + std::next(it)->lo);
      if (v.contains(mid)) best = std::max(best, b.distance(mid));
    }
  }
  return best;
}

}  // namespace

double hausdorff_distance(const BandSet& a, const BandSet& b) {
  if (a.empty() || b.empty()) throw EmptySetError("Hausdorff distance to an empty set");
  return std::max(directed(a, b), directed(b, a));
}

BandSet gaps(const BandSet& s, Interval within) {
  check(within);
  if (s.empty()) throw EmptySetError("gaps of an empty set");
  std::vector<Interval> out;
  double cursor = within.lo;
  for (const auto& v : s) {
    if (v.lo > cursor && cursor < within.hi)
      out.push_back({cursor, std::min(v.lo, within.hi)});
    cursor = std::max(cursor, v.hi);
    if (cursor >= within.hi) break;
  }
  if (cursor < within.hi) out.push_back({cursor, within.hi});
  // Gaps are kept as given, even when narrower than the merge tolerance.
  return BandSet::from_sorted(out, -1.0);
}

double max_gap(const BandSet& s) noexcept {
  double g = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) g = std::max(g, s[i].lo - s[i - 1].hi);
  return g;
}

}  // namespace harperlab
