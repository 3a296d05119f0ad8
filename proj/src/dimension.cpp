#include "harperlab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include "harperlab/chambers.hpp"
#include "harperlab/contfrac.hpp"
#include "harperlab/errors.hpp"

namespace harperlab {

void ScaleWindow::validate() const {
  if (!(std::isfinite(r_min) && std::isfinite(r_max) && r_min > 0 && r_min < r_max))
    throw DegenerateWindowError("scale window needs 0 < r_min < r_max");
  if (grid < 4) throw DegenerateWindowError("scale window needs at least 4 scales");
}

std::vector<double> ScaleWindow::scales() const {
  validate();
  std::vector<double> r(grid);
  const double a = std::log(r_max), b = std::log(r_min);
  for (std::size_t i = 0; i < grid; ++i)
    r[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(grid - 1));
  r.front() = r_max;
  r.back() = r_min;
  return r;
}

namespace {

DimensionEstimate fit_table(std::vector<ScaleCount> table, const ScaleWindow& w) {
  DimensionEstimate e;
  e.window = w;
  const auto n = static_cast<double>(table.size());
  double sx = 0, sy = 0;
  for (const auto& t : table) {
    if (t.n == 0) throw DegenerateWindowError("empty box count inside the window");
    sx += -std::log(t.r);
    sy += std::log(static_cast<double>(t.n));
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& t : table) {
    const double x = -std::log(t.r) - mx, y = std::log(static_cast<double>(t.n)) - my;
    sxx += x * x;
    sxy += x * y;
  }
  e.slope = sxy / sxx;
  e.intercept = my - e.slope * mx;
  double ss = 0;
  for (const auto& t : table) {
    const double d = std::log(static_cast<double>(t.n)) - (e.intercept - e.slope * std::log(t.r));
    ss += d * d;
  }
  e.residual = std::sqrt(ss / n);
  e.slope_max = -INFINITY;
  e.slope_min = INFINITY;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const double s = std::log(static_cast<double>(table[i].n) / static_cast<double>(table[i - 1].n)) /
                     std::log(table[i - 1].r / table[i].r);
    e.slope_max = std::max(e.slope_max, s);
    e.slope_min = std::min(e.slope_min, s);
  }
  e.table = std::move(table);
  return e;
}

void check_against_set(const BandSet& s, const ScaleWindow& w) {
  if (s.empty()) throw EmptySetError("box_dim_fit of an empty set");
  w.validate();
  const double diam = s.hull().length();
  if (!(w.r_max < diam)) throw DegenerateWindowError("r_max must lie below the diameter");
  if (w.r_min < 1e-10 * diam)
    throw DegenerateWindowError("r_min below the endpoint tolerance of the set");
}

}  // namespace

DimensionEstimate box_dim_fit(const std::function<std::uint64_t(double)>& count,
                              const ScaleWindow& window) {
  const auto r = window.scales();
  std::vector<ScaleCount> table(r.size());
  std::vector<std::exception_ptr> err(r.size());
  const auto n = static_cast<std::int64_t>(r.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      table[k] = {r[k], count(r[k])};
    } catch (...) {
      err[k] = std::current_exception();
    }
  }
  for (const auto& e : err)
    if (e) std::rethrow_exception(e);
  return fit_table(std::move(table), window);
}

DimensionEstimate box_dim_fit_serial(const std::function<std::uint64_t(double)>& count,
                                     const ScaleWindow& window) {
  std::vector<ScaleCount> table;
  for (double r : window.scales()) table.push_back({r, count(r)});
  return fit_table(std::move(table), window);
}

DimensionEstimate box_dim_fit(const BandSet& s, const ScaleWindow& window) {
  check_against_set(s, window);
  return box_dim_fit([&s](double r) { return box_count(s, r); }, window);
}

BandSet cantor_prefractal(std::size_t depth, double lo, double hi) {
  if (!(lo < hi)) throw InvalidIntervalError("cantor_prefractal needs lo < hi");
  if (depth > 24) throw ValidationError("cantor_prefractal depth above 24");
  // Left ends as integer multiples of 3^-depth keep the endpoints exact.
  std::vector<std::uint64_t> left{0};
  std::uint64_t unit = 1;
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::uint64_t> next;
    next.reserve(2 * left.size());
    for (auto x : left) {
      next.push_back(3 * x);
      next.push_back(3 * x + 2);
    }
    left = std::move(next);
    unit *= 3;
  }
  const double scale = (hi - lo) / static_cast<double>(unit);
  std::vector<Interval> iv;
  iv.reserve(left.size());
  for (auto x : left)
    iv.push_back({lo + scale * static_cast<double>(x), lo + scale * static_cast<double>(x + 1)});
  return BandSet::from_sorted(iv, 0.0);
}

CoverSequenceReport hausdorff_upper_from_covers(const std::vector<std::vector<Interval>>& covers,
                                                double delta, double constant) {
  if (!(delta > 0 && delta <= 1)) throw ValidationError("delta must lie in (0, 1]");
  if (covers.size() < 2) throw InvalidCoverSequenceError("need at least two cover families");
  CoverSequenceReport rep;
  for (const auto& fam : covers) {
    if (fam.empty()) throw InvalidCoverSequenceError("empty cover family");
    double sum = 0, mesh = 0;
    for (const auto& u : fam) {
      if (!(u.lo <= u.hi)) throw InvalidIntervalError("cover member with lo > hi");
      sum += std::pow(u.length(), delta);
      mesh = std::max(mesh, u.length());
    }
    if (!rep.meshes.empty() && !(mesh < rep.meshes.back()))
      throw InvalidCoverSequenceError("cover mesh does not shrink along the sequence");
    rep.sums.push_back(sum);
    rep.meshes.push_back(mesh);
  }
  rep.constant = constant > 0 ? constant : rep.sums.front();
  rep.sup_sum = *std::max_element(rep.sums.begin(), rep.sums.end());
  rep.bound_holds = rep.sup_sum <= rep.constant * (1 + 1e-9);
  return rep;
}

void check_window(const ScaleWindow& w, double error_radius) {
  w.validate();
  if (w.r_min < 10.0 * error_radius)
    throw WindowTooFineError("window reaches within 10 error radii (r_min " +
                             std::to_string(w.r_min) + ", error radius " +
                             std::to_string(error_radius) + ")");
}

ScaleWindow auto_window(const BandSet& s, double error_radius, std::size_t grid,
                        double floor_factor) {
  if (s.empty()) throw EmptySetError("auto_window of an empty set");
  ScaleWindow w;
  w.grid = grid;
  w.r_min = std::max(floor_factor * error_radius, 1e-9 * s.hull().length());
  w.r_max = std::min(max_gap(s), 0.5 * s.hull().length());
  if (!(w.r_max >= 10.0 * w.r_min))
    throw WindowTooFineError("less than a decade between the error floor and the largest gap");
  return w;
}

std::vector<TrendRow> dim_trend_experiment(const std::vector<std::uint64_t>& a_values,
                                           const TrendOptions& opt) {
  if (a_values.empty()) throw ValidationError("dim_trend_experiment needs a values");
  for (std::size_t i = 1; i < a_values.size(); ++i)
    if (!(a_values[i] > a_values[i - 1])) throw ValidationError("a values must ascend");
  if (opt.floor_factor < 10.0)
    throw WindowTooFineError("floor factor below 10 error radii");

  const auto m = a_values.size();
  std::vector<ApproxSpectrum> spec(m);
  std::vector<std::exception_ptr> err(m);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m); ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const auto cf = ContinuedFraction({}, {a_values[k]});
      spec[k] = spectrum_approx(cf, deepest_convergent(cf, opt.q_cap));
    } catch (...) {
      err[k] = std::current_exception();
    }
  }
  for (const auto& e : err)
    if (e) std::rethrow_exception(e);

  double floor = 0;
  for (const auto& s : spec) floor = std::max(floor, s.error_radius);

  std::vector<TrendRow> rows;
  for (std::size_t k = 0; k < m; ++k) {
    const double radius = opt.shared_floor ? floor : spec[k].error_radius;
    const auto w = auto_window(spec[k].bands, radius, opt.grid, opt.floor_factor);
    const auto e = box_dim_fit(spec[k].bands, w);
    rows.push_back({a_values[k], spec[k].convergent.q, spec[k].error_radius, e.slope,
                    e.slope_max, e.slope_min, w.r_min, w.r_max});
  }
  return rows;
}

std::string trend_csv(const std::vector<TrendRow>& rows) {
  std::string out = "a,q_used,error_radius,slope,slope_max,slope_min,r_min,r_max\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%llu,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<unsigned long long>(r.a), static_cast<long long>(r.q_used),
                  r.error_radius, r.slope, r.slope_max, r.slope_min, r.r_min, r.r_max);
    out += buf;
  }
  return out;
}

}  // namespace harperlab
