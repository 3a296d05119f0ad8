#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace harperlab {

// Gaps at or below this width are closed by normalization.
inline constexpr double kMergeTolerance = 1e-12;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of disjoint closed intervals, stored sorted with
// hi_i < lo_{i+1}. Immutable after construction.
class BandSet {
 public:
  BandSet() = default;

  // Sorts and merges overlapping or touching input. Throws
  // InvalidIntervalError on lo > hi or non-finite endpoints.
  static BandSet normalize(std::vector<Interval> raw, double tol = kMergeTolerance);
  // Same, but the caller promises the input is already sorted by lo.
  static BandSet from_sorted(std::span<const Interval> sorted,
                             double tol = kMergeTolerance);

  const std::vector<Interval>& intervals() const noexcept { return iv_; }
  std::size_t size() const noexcept { return iv_.size(); }
  bool empty() const noexcept { return iv_.empty(); }
  const Interval& operator[](std::size_t i) const { return iv_[i]; }
  auto begin() const noexcept { return iv_.begin(); }
  auto end() const noexcept { return iv_.end(); }

  // Smallest interval containing the set; throws EmptySetError if empty.
  Interval hull() const;
  double measure() const noexcept;
  bool contains(double x) const noexcept;
  // Distance from x to the set (0 inside).
  double distance(double x) const;

  // Image under x -> scale * x + shift, scale != 0.
  BandSet affine(double scale, double shift) const;

  friend bool operator==(const BandSet&, const BandSet&) = default;

 private:
  std::vector<Interval> iv_;
};

// A ⊆ B up to `tol` slack at every endpoint.
bool is_subset(const BandSet& a, const BandSet& b, double tol = kMergeTolerance);

// Union of the pairwise sums [a.lo + b.lo, a.hi + b.hi]. The serial kernel
// runs a k-way heap merge over the |A| sorted rows of the sum table; the
// parallel kernel merges fixed-size row blocks independently and unions the
// partial results, which is exact because the merge rule only compares
// original endpoints. Both return identical sets.
BandSet minkowski_sum_serial(const BandSet& a, const BandSet& b);
BandSet minkowski_sum(const BandSet& a, const BandSet& b);

// Minimal number of closed length-r intervals covering S, by the greedy
// left-to-right sweep (optimal in one dimension).
std::uint64_t box_count(const BandSet& s, double r);

double hausdorff_distance(const BandSet& a, const BandSet& b);

// Bounded components of within \ S, as closed intervals, in order.
BandSet gaps(const BandSet& s, Interval within);

// Length of the largest gap between consecutive bands (0 for one band).
double max_gap(const BandSet& s) noexcept;

}  // namespace harperlab
