#include "harperlab/multidim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include "harperlab/dimension.hpp"
#include "harperlab/errors.hpp"

namespace harperlab {

BandSet merge_small_gaps(const BandSet& s, double g) {
  if (!(g >= 0)) throw ValidationError("merge radius must be non-negative");
  std::vector<Interval> out;
  out.reserve(s.size());
  for (const auto& v : s) {
    if (!out.empty() && v.lo - out.back().hi <= g)
      out.back().hi = std::max(out.back().hi, v.hi);
    else
      out.push_back(v);
  }
  return BandSet::from_sorted(out, 0.0);
}

MdSpectrum md_sum(const std::vector<BandSet>& components, const std::vector<double>& radii,
                  const MdOptions& opt) {
  if (components.empty()) throw ValidationError("md_sum needs at least one component");
  if (radii.size() != components.size())
    throw ValidationError("md_sum needs one error radius per component");
  for (const auto& c : components)
    if (c.empty()) throw EmptySetError("md_sum of an empty component");
  if (opt.max_intervals < 1) throw ValidationError("max_intervals must be positive");

  MdSpectrum out;
  out.bands = components.front();
  out.error_radius = radii.front();
  for (std::size_t i = 1; i < components.size(); ++i) {
    BandSet rhs = components[i];
    out.error_radius += radii[i];
    if (out.bands.size() > opt.max_intervals || rhs.size() > opt.max_intervals) {
      double g = out.error_radius > 0 ? out.error_radius : 1e-12 * out.bands.hull().length();
      BandSet a, b;
      for (;;) {
        a = merge_small_gaps(out.bands, g);
        b = merge_small_gaps(rhs, g);
        if (a.size() <= opt.max_intervals && b.size() <= opt.max_intervals) break;
        g *= 2;
      }
      out.bands = std::move(a);
      rhs = std::move(b);
      out.coarsening += g;
      out.error_radius += g;
    }
    out.bands = minkowski_sum(out.bands, rhs);
  }
  return out;
}

MdSpectrum md_spectrum(const std::vector<ContinuedFraction>& fv, std::size_t depth,
                       const MdOptions& opt) {
  if (fv.empty()) throw ValidationError("frequency vector must have d >= 1");
  const auto d = fv.size();
  std::vector<ApproxSpectrum> comp(d);
  std::vector<std::exception_ptr> err(d);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(d); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      comp[k] = spectrum_approx(fv[k], depth);
    } catch (...) {
      err[k] = std::current_exception();
    }
  }
  for (const auto& e : err)
    if (e) std::rethrow_exception(e);
  std::vector<BandSet> sets;
  std::vector<double> radii;
  std::vector<std::int64_t> qs;
  for (auto& c : comp) {
    sets.push_back(std::move(c.bands));
    radii.push_back(c.error_radius);
    qs.push_back(c.convergent.q);
  }
  auto out = md_sum(sets, radii, opt);
  out.q_used = std::move(qs);
  return out;
}

MdSpectrum md_spectrum_rational(const std::vector<RationalFrequency>& fv, const MdOptions& opt) {
  if (fv.empty()) throw ValidationError("frequency vector must have d >= 1");
  std::vector<BandSet> sets(fv.size());
  for (std::size_t i = 0; i < fv.size(); ++i) sets[i] = spectrum_rational(fv[i]);
  auto out = md_sum(sets, std::vector<double>(fv.size(), 0.0), opt);
  for (const auto& f : fv) out.q_used.push_back(f.q);
  return out;
}

namespace {

double longest(const BandSet& s) {
  double m = 0;
  for (const auto& v : s) m = std::max(m, v.length());
  return m;
}

}  // namespace

std::vector<CollapseRow> collapse_report(const std::vector<std::uint64_t>& a_values,
                                         const CollapseOptions& opt) {
  if (a_values.empty()) throw ValidationError("collapse_report needs a values");
  for (std::size_t i = 1; i < a_values.size(); ++i)
    if (!(a_values[i] > a_values[i - 1])) throw ValidationError("a values must ascend");
  if (opt.d < 1) throw ValidationError("dimension d must be >= 1");
  if (opt.floor_factor < 10.0) throw WindowTooFineError("floor factor below 10 error radii");

  const auto m = a_values.size();
  std::vector<ContinuedFraction> cf;
  for (auto a : a_values) cf.push_back(ContinuedFraction({}, {a}));

  std::size_t depth = 0;
  if (opt.depth) {
    depth = *opt.depth;
  } else {
    depth = SIZE_MAX;
    for (const auto& c : cf) depth = std::min(depth, deepest_convergent(c, opt.q_cap));
  }

  std::vector<CollapseRow> rows(m);
  std::vector<MdSpectrum> fine(m);
  std::vector<ApproxSpectrum> comp(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto coarse = md_spectrum(std::vector<ContinuedFraction>(opt.d, cf[k]), depth, opt.md);
    rows[k].a = a_values[k];
    rows[k].d = opt.d;
    rows[k].measure = coarse.bands.measure();
    rows[k].max_interior = longest(coarse.bands);
    rows[k].measure_depth = depth;
    rows[k].measure_q = coarse.q_used.front();

    comp[k] = spectrum_approx(cf[k], deepest_convergent(cf[k], opt.q_cap));
    fine[k] = md_sum(std::vector<BandSet>(opt.d, comp[k].bands),
                     std::vector<double>(opt.d, comp[k].error_radius), opt.md);
  }

  double shared = 0;
  for (const auto& f : fine) shared = std::max(shared, f.error_radius);
  for (std::size_t k = 0; k < m; ++k) {
    const double floor = opt.shared_floor ? shared : fine[k].error_radius;
    const auto w = auto_window(comp[k].bands, floor, opt.grid, opt.floor_factor);
    rows[k].md_slope = box_dim_fit(fine[k].bands, w).slope;
    rows[k].sum_slope = static_cast<double>(opt.d) * box_dim_fit(comp[k].bands, w).slope;
    rows[k].slope_q = comp[k].convergent.q;
    rows[k].slope_error_radius = fine[k].error_radius;
    rows[k].r_min = w.r_min;
    rows[k].r_max = w.r_max;
  }
  return rows;
}

std::string collapse_csv(const std::vector<CollapseRow>& rows) {
  std::string out = "a,d,measure,md_slope,sum_slope,max_interior\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%zu,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(r.a), r.d, r.measure, r.md_slope, r.sum_slope,
                  r.max_interior);
    out += buf;
  }
  return out;
}

}  // namespace harperlab
