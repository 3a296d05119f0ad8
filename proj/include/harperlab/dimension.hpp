#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "harperlab/bandset.hpp"

namespace harperlab {

struct ScaleWindow {
  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t grid = 16;  // log-spaced scales, r_max first

  // Throws DegenerateWindowError unless 0 < r_min < r_max and grid >= 4.
  void validate() const;
  std::vector<double> scales() const;
};

struct ScaleCount {
  double r = 0.0;
  std::uint64_t n = 0;
};

struct DimensionEstimate {
  double slope = 0.0;      // least squares of log N_r on log(1/r)
  double intercept = 0.0;
  double residual = 0.0;   // root mean square of the fit residuals
  double slope_max = 0.0;  // extremal slopes between neighbouring scales
  double slope_min = 0.0;
  ScaleWindow window;
  std::vector<ScaleCount> table;
};

// Box-dimension fit of a band set. Requires r_max below the diameter and
// r_min >= 1e-10 * diameter; throws DegenerateWindowError otherwise.
DimensionEstimate box_dim_fit(const BandSet& s, const ScaleWindow& window);
// Same fit for any counting function N(r); scales are evaluated in
// parallel, so `count` must be safe to call concurrently.
DimensionEstimate box_dim_fit(const std::function<std::uint64_t(double)>& count,
                              const ScaleWindow& window);
// Serial evaluation of the table, kept as the reference for the parallel fit.
DimensionEstimate box_dim_fit_serial(const std::function<std::uint64_t(double)>& count,
                                     const ScaleWindow& window);

// Middle-thirds Cantor set at the given level, inside [lo, hi].
BandSet cantor_prefractal(std::size_t depth, double lo = 0.0, double hi = 1.0);

struct CoverSequenceReport {
  bool bound_holds = false;
  double constant = 0.0;  // the uniform bound tested against
  double sup_sum = 0.0;
  std::vector<double> sums;    // sum of |U|^delta per family
  std::vector<double> meshes;  // longest member per family
};
// Interval families covering one set with strictly shrinking mesh. The
// bound holds when every sum stays below `constant` (default: the first
// family's sum) up to relative 1e-9. Throws InvalidCoverSequenceError for
// fewer than two families, empty families, or a mesh that does not shrink.
CoverSequenceReport hausdorff_upper_from_covers(const std::vector<std::vector<Interval>>& covers,
                                                double delta, double constant = 0.0);

struct TrendRow {
  std::uint64_t a = 0;
  std::int64_t q_used = 0;
  double error_radius = 0.0;
  double slope = 0.0;
  double slope_max = 0.0;
  double slope_min = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
};

struct TrendOptions {
  std::int64_t q_cap = 10'000;
  std::size_t grid = 16;
  // Lower scale end as a multiple of the error radius. With a shared floor
  // every row uses the largest of these over the family.
  double floor_factor = 10.0;
  bool shared_floor = true;
};

// Automatic window for one approximate spectrum: from floor_factor times
// the error radius up to the largest gap. Throws WindowTooFineError when
// less than a decade remains.
ScaleWindow auto_window(const BandSet& s, double error_radius, std::size_t grid = 16,
                        double floor_factor = 10.0);
// Throws WindowTooFineError when r_min comes within 10 error radii.
void check_window(const ScaleWindow& w, double error_radius);

// Periodic frequencies [(a)] for each a, at the deepest convergent with
// q <= q_cap, fitted over the automatic window.
std::vector<TrendRow> dim_trend_experiment(const std::vector<std::uint64_t>& a_values,
                                           const TrendOptions& opt = {});

std::string trend_csv(const std::vector<TrendRow>& rows);

}  // namespace harperlab
