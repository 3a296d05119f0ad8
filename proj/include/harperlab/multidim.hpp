#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "harperlab/bandset.hpp"
#include "harperlab/chambers.hpp"
#include "harperlab/contfrac.hpp"

namespace harperlab {

struct MdOptions {
  // Operands above this many intervals are coarsened before a sum.
  std::size_t max_intervals = 100'000;
};

struct MdSpectrum {
  BandSet bands;
  // Sum of component radii plus every coarsening radius applied.
  double error_radius = 0.0;
  double coarsening = 0.0;
  std::vector<std::int64_t> q_used;  // per component; empty for exact input
};

// Closes every gap of width <= g. The result lies within g/2 of s in
// Hausdorff distance.
BandSet merge_small_gaps(const BandSet& s, double g);

// Iterated Minkowski sum of the components, left to right. Before each sum,
// when an operand exceeds max_intervals, both operands are coarsened with
// a common radius g (the accumulated error radius, doubled until both fit)
// and g is added to the error.
MdSpectrum md_sum(const std::vector<BandSet>& components, const std::vector<double>& radii,
                  const MdOptions& opt = {});

// Components spectrum_approx(alpha_i, depth), computed in parallel.
MdSpectrum md_spectrum(const std::vector<ContinuedFraction>& fv, std::size_t depth,
                       const MdOptions& opt = {});
// Exact rational components; error radius 0 unless coarsening kicks in.
MdSpectrum md_spectrum_rational(const std::vector<RationalFrequency>& fv,
                                const MdOptions& opt = {});

struct CollapseRow {
  std::uint64_t a = 0;
  std::size_t d = 1;
  double measure = 0.0;       // md spectrum at the common depth
  double md_slope = 0.0;      // md spectrum at the deepest q <= q_cap
  double sum_slope = 0.0;     // d times the component slope, same window
  double max_interior = 0.0;  // longest interval at the common depth
  // Provenance.
  std::size_t measure_depth = 0;
  std::int64_t measure_q = 0;
  std::int64_t slope_q = 0;
  double slope_error_radius = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
};

struct CollapseOptions {
  std::size_t d = 2;
  // Convergent depth shared by every a for the measure columns; defaults
  // to the deepest depth with q <= q_cap for all of them.
  std::optional<std::size_t> depth;
  std::int64_t q_cap = 10'000;
  std::size_t grid = 16;
  double floor_factor = 10.0;
  // With a shared floor every row starts at the largest md error radius
  // of the family, as in the trend experiment; otherwise at its own.
  bool shared_floor = false;
  MdOptions md;
};

// Equal components [(a)] in dimension d. Slope columns use the window of
// the dimension trend experiment with the floor raised to floor_factor
// times the md error radius; with shared_floor, d = 1 reproduces
// dim_trend_experiment.
std::vector<CollapseRow> collapse_report(const std::vector<std::uint64_t>& a_values,
                                         const CollapseOptions& opt = {});

std::string collapse_csv(const std::vector<CollapseRow>& rows);

}  // namespace harperlab
