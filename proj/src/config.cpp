#include "harperlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "harperlab/errors.hpp"
#include "harperlab/random.hpp"

namespace harperlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative slack for comparisons that are exact in real arithmetic.
constexpr double kRel = 1e-12;

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Log-uniform draw from [lo, hi] after pulling both ends inward by
// min(2, (hi/lo)^{1/4}).
double draw_inside(Rng& rng, double lo, double hi) {
  const double m = std::min(2.0, std::pow(hi / lo, 0.25));
  return rng.log_uniform(lo * m, hi / m);
}

// Same on logarithms: uniform in [a + mu, b - mu], mu = min(log 2, (b-a)/4).
double draw_inside_log(Rng& rng, double a, double b) {
  const double mu = std::min(std::numbers::ln2, (b - a) / 4);
  return rng.uniform(a + mu, b - mu);
}

}  // namespace

// ---------------------------------------------------------------- params

void ConfigParams::validate_shape() const {
  auto bad = [](const std::string& what) { throw ValidationError("config params: " + what); };
  if (!(std::isfinite(varsigma) && std::isfinite(epsilon) && std::isfinite(M) &&
        std::isfinite(C)))
    bad("parameters must be finite");
  if (!(varsigma > 0 && varsigma < 4)) bad("varsigma must lie in (0, 4)");
  if (!(epsilon > 0 && epsilon < varsigma / 100)) bad("epsilon must lie in (0, varsigma/100)");
  if (!(C > 1)) bad("C must exceed 1");
  if (!(M > C)) bad("M must exceed C");
}

double ConfigParams::h_chain() const {
  return std::min({1.0 / C, epsilon / M, std::exp(-1.0 / C)});
}

void ConfigParams::validate() const {
  validate_shape();
  if (!(h > 0 && h < h_chain()))
    throw ValidationError("config params: h = " + fmt(h) + " outside (0, " + fmt(h_chain()) +
                          ")");
}

// --------------------------------------------------------- configuration

double BandRun::len() const { return std::exp(log_len); }

Configuration::Configuration(Interval hull, std::vector<BandRun> runs, std::vector<Block> blocks)
    : hull_(hull), runs_(std::move(runs)), blocks_(std::move(blocks)) {
  if (!(hull_.lo < hull_.hi)) throw InvalidIntervalError("configuration hull must have lo < hi");
  if (runs_.empty()) throw ValidationError("configuration without bands");
  const double slack = kRel * std::max(std::abs(hull_.lo), std::abs(hull_.hi));
  for (std::size_t k = 0; k < runs_.size(); ++k) {
    const auto& u = runs_[k];
    if (u.count == 0) throw ValidationError("band run with zero count");
    if (u.count > 1 && !(u.step > u.len())) throw ValidationError("overlapping bands in a run");
    if (u.lo < hull_.lo - slack || u.last_hi() > hull_.hi + slack)
      throw ValidationError("band outside the configuration hull");
    if (k > 0 && !(u.lo > runs_[k - 1].last_hi()))
      throw ValidationError("bands must be ordered and disjoint");
  }
  index();
  if (blocks_.empty()) {
    Block b{0, runs_.size(), hull_, 0};
    // Nearest band to the hull midpoint.
    const double mid = 0.5 * (hull_.lo + hull_.hi);
    double best = kInf;
    for (std::size_t k = 0; k < runs_.size(); ++k) {
      const auto& u = runs_[k];
      double j = u.count > 1 ? std::round((mid - u.lo - 0.5 * u.len()) / u.step) : 0.0;
      j = std::clamp(j, 0.0, static_cast<double>(u.count - 1));
      const auto jj = static_cast<std::uint64_t>(j);
      const double d = std::abs(u.band_lo(jj) + 0.5 * u.len() - mid);
      if (d < best) {
        best = d;
        b.central = offsets_[k] + jj;
      }
    }
    blocks_.push_back(b);
  }
  for (const auto& b : blocks_) {
    if (b.run_begin >= b.run_end || b.run_end > runs_.size())
      throw ValidationError("block run range out of bounds");
    if (b.central < offsets_[b.run_begin] || b.central >= offsets_[b.run_end])
      throw ValidationError("block central band outside the block");
  }
}

void Configuration::index() {
  offsets_.assign(runs_.size() + 1, 0);
  for (std::size_t k = 0; k < runs_.size(); ++k) offsets_[k + 1] = offsets_[k] + runs_[k].count;
}

Configuration Configuration::from_intervals(Interval hull, const std::vector<Interval>& bands,
                                            std::optional<std::uint64_t> central) {
  std::vector<BandRun> runs;
  runs.reserve(bands.size());
  for (const auto& v : bands) {
    if (!(v.lo <= v.hi)) throw InvalidIntervalError("configuration band with lo > hi");
    runs.push_back({v.lo, std::log(v.hi - v.lo), 0.0, 1});
  }
  std::vector<Block> blocks;
  if (central) {
    if (*central >= bands.size()) throw ValidationError("central band index out of range");
    blocks.push_back({0, runs.size(), hull, *central});
  }
  return Configuration(hull, std::move(runs), std::move(blocks));
}

std::size_t Configuration::run_of(std::uint64_t i) const {
  if (i >= count()) throw ValidationError("band index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

Interval Configuration::band(std::uint64_t i) const {
  const auto k = run_of(i);
  const auto& u = runs_[k];
  const auto j = i - offsets_[k];
  return {u.band_lo(j), u.band_hi(j)};
}

double Configuration::band_log_len(std::uint64_t i) const { return runs_[run_of(i)].log_len; }

Configuration Configuration::affine(double scale, double shift) const {
  if (!(scale > 0) || !std::isfinite(scale))
    throw ValidationError("configuration affine map needs a positive finite scale");
  const double ls = std::log(scale);
  auto runs = runs_;
  for (auto& u : runs) {
    u.lo = scale * u.lo + shift;
    u.log_len += ls;
    u.step *= scale;
  }
  auto blocks = blocks_;
  for (auto& b : blocks) b.hull = {scale * b.hull.lo + shift, scale * b.hull.hi + shift};
  return Configuration({scale * hull_.lo + shift, scale * hull_.hi + shift}, std::move(runs),
                       std::move(blocks));
}

Configuration Configuration::block(std::size_t b) const {
  const auto& blk = blocks_.at(b);
  std::vector<BandRun> runs(runs_.begin() + static_cast<std::ptrdiff_t>(blk.run_begin),
                            runs_.begin() + static_cast<std::ptrdiff_t>(blk.run_end));
  const auto base = offsets_[blk.run_begin];
  return Configuration(blk.hull, std::move(runs),
                       {Block{0, blk.run_end - blk.run_begin, blk.hull, blk.central - base}});
}

BandSet Configuration::bands(std::uint64_t max_bands) const {
  if (count() > max_bands)
    throw ValidationError("configuration has " + std::to_string(count()) +
                          " bands, more than the expansion limit");
  std::vector<Interval> out;
  out.reserve(count());
  for (const auto& u : runs_)
    for (std::uint64_t j = 0; j < u.count; ++j) out.push_back({u.band_lo(j), u.band_hi(j)});
  return BandSet::from_sorted(out, -1.0);
}

// ---------------------------------------------------------- standard frame

namespace {

bool in_standard_frame(const Configuration& cfg, std::uint64_t central, double varsigma) {
  const auto& I = cfg.hull();
  const double tol = kRel * 4;
  return cfg.band(central).contains(0.0) && I.lo <= -varsigma + tol && I.hi >= varsigma - tol &&
         I.lo >= -4 - tol && I.hi <= 4 + tol;
}

}  // namespace

Standardized normalize_to_standard(const Configuration& cfg, double varsigma) {
  if (cfg.count() < 3)
    throw NotStandardizableError("a configuration needs at least three bands");
  if (cfg.blocks().size() != 1)
    throw NotStandardizableError("standard frame is defined for a single block");
  const auto central = cfg.blocks().front().central;
  if (in_standard_frame(cfg, central, varsigma)) return {cfg, AffineMap{}};
  const auto J = cfg.band(central);
  const double t = 0.5 * (J.lo + J.hi);
  const double dl = t - cfg.hull().lo, dr = cfg.hull().hi - t;
  if (!(std::min(dl, dr) > 0))
    throw NotStandardizableError("central band touches the hull end");
  const double s = varsigma / std::min(dl, dr);
  if (s * std::max(dl, dr) > 4 * (1 + kRel))
    throw NotStandardizableError("no affine map puts the hull between [-varsigma, varsigma] and "
                                 "[-4, 4]; the central band is too far off-centre");
  const AffineMap map{s, -s * t};
  return {cfg.affine(map.scale, map.shift), map};
}

const char* zone_name(Zone z) {
  switch (z) {
    case Zone::Inner: return "in";
    case Zone::OuterMinus: return "out-";
    case Zone::OuterPlus: return "out+";
    case Zone::Middle: return "mid";
  }
  return "?";
}

std::uint64_t ZoneClassification::count(Zone z) const {
  std::uint64_t n = 0;
  for (const auto& r : ranges)
    if (r.zone == z) n += r.size();
  return n;
}

namespace {

// Local indices [first, last] of run bands meeting the closed interval
// [a, b]; empty when first > last.
std::pair<std::int64_t, std::int64_t> meeting(const BandRun& u, double a, double b) {
  const auto n = static_cast<std::int64_t>(u.count);
  const double len = u.len();
  auto lo_ok = [&](std::int64_t j) { return u.band_lo(static_cast<std::uint64_t>(j)) <= b; };
  auto hi_ok = [&](std::int64_t j) { return u.band_lo(static_cast<std::uint64_t>(j)) + len >= a; };
  std::int64_t last, first;
  if (n == 1) {
    const bool m = lo_ok(0) && hi_ok(0);
    return m ? std::pair{std::int64_t{0}, std::int64_t{0}} : std::pair{std::int64_t{1}, std::int64_t{0}};
  }
  // Estimate by division, then correct against the exact predicates.
  auto clampi = [&](double x) {
    if (!(x > -1)) return std::int64_t{-1};
    if (x >= static_cast<double>(n - 1)) return n - 1;
    return static_cast<std::int64_t>(std::floor(x));
  };
  last = clampi((b - u.lo) / u.step);
  while (last >= 0 && !lo_ok(last)) --last;
  while (last + 1 < n && lo_ok(last + 1)) ++last;
  first = clampi((a - len - u.lo) / u.step) ;
  first = std::max<std::int64_t>(first, 0);
  while (first < n && !hi_ok(first)) ++first;
  while (first > 0 && hi_ok(first - 1)) --first;
  return {first, last};
}

}  // namespace

ZoneClassification classify(const Configuration& cfg, const ConfigParams& p) {
  if (cfg.blocks().size() != 1)
    throw NotStandardizableError("zones are defined for a single block");
  ZoneClassification zc;
  zc.central = cfg.blocks().front().central;
  if (!cfg.band(zc.central).contains(0.0))
    throw NotStandardizableError("central band does not contain 0");
  const double Mh = p.M * p.h;
  zc.r = zc.central;
  zc.s = cfg.count() - 1 - zc.central;
  std::uint64_t inner_min = zc.central, inner_max = zc.central;

  for (std::size_t k = 0; k < cfg.runs().size(); ++k) {
    const auto& u = cfg.runs()[k];
    const auto n = static_cast<std::int64_t>(u.count);
    const auto in = meeting(u, -Mh, Mh);
    // Every band lies in I, so the outer intervals can be left unbounded;
    // that keeps extremal bands outer when a rescaled endpoint rounds past I.
    const auto om = meeting(u, -kInf, -p.epsilon);
    const auto op = meeting(u, p.epsilon, kInf);
    std::vector<std::int64_t> cuts{0, n};
    for (auto [f, l] : {in, om, op})
      if (f <= l) {
        cuts.push_back(f);
        cuts.push_back(l + 1);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    auto inside = [](std::pair<std::int64_t, std::int64_t> r, std::int64_t j) {
      return r.first <= j && j <= r.second;
    };
    const auto base = cfg.run_offset(k);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const auto j0 = cuts[c], j1 = cuts[c + 1] - 1;
      if (j0 < 0 || j1 >= n || j0 > j1) continue;
      Zone z = Zone::Middle;
      if (inside(in, j0)) z = Zone::Inner;
      else if (inside(om, j0)) z = Zone::OuterMinus;
      else if (inside(op, j0)) z = Zone::OuterPlus;
      const std::uint64_t g0 = base + static_cast<std::uint64_t>(j0);
      const std::uint64_t g1 = base + static_cast<std::uint64_t>(j1);
      if (!zc.ranges.empty() && zc.ranges.back().zone == z && zc.ranges.back().run == k &&
          zc.ranges.back().last + 1 == g0)
        zc.ranges.back().last = g1;
      else
        zc.ranges.push_back({z, k, g0, g1});
      if (z == Zone::Inner) {
        inner_min = std::min(inner_min, g0);
        inner_max = std::max(inner_max, g1);
      }
    }
  }
  zc.r1 = zc.central - inner_min;
  zc.s1 = inner_max - zc.central;
  return zc;
}

// ------------------------------------------------------------------ audit

const AuditItem& AuditReport::item(const std::string& id) const {
  for (const auto& it : items)
    if (it.id == id) return it;
  throw ValidationError("audit report has no item '" + id + "'");
}

namespace {

// Running maximum of the constant an item needs, with the worst location.
struct Need {
  double req = 1.0;
  std::string where;
  void add(double r, const char* what, std::uint64_t index) {
    if (std::isnan(r)) r = kInf;
    if (r > req) {
      req = r;
      where = std::string(what) + " at band " + std::to_string(index);
    }
  }
};

// exp|log x - log base|: the least C with base/C <= x <= C base.
double bracket_log(double log_x, double log_base) { return std::exp(std::abs(log_x - log_base)); }

// Smallest C >= 1 with f(C) <= target for decreasing f, or with
// f(C) >= target for increasing f.
template <class F>
double solve_monotone(F f, double target, bool decreasing) {
  auto ok = [&](double c) { return decreasing ? f(c) <= target : f(c) >= target; };
  if (ok(1.0)) return 1.0;
  double hi = 2.0;
  while (!ok(hi)) {
    hi *= 2;
    if (hi > 1e300) return kInf;
  }
  double lo = hi / 2;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// Gap on the side of band i facing the central band, and its midpoint.
struct GapInfo {
  double len;
  double centre;
};
GapInfo inner_gap(const Configuration& cfg, std::uint64_t i, std::uint64_t central) {
  const auto b = cfg.band(i);
  if (i > central) {
    const auto a = cfg.band(i - 1);
    return {b.lo - a.hi, 0.5 * (a.hi + b.lo)};
  }
  const auto c = cfg.band(i + 1);
  return {c.lo - b.hi, 0.5 * (b.hi + c.lo)};
}

// c with c (-log c) = y on (0, 1/e).
double solve_c_log(double y) {
  double lo = 0.0, hi = std::exp(-1.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * -std::log(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

AuditReport audit_standard(const Configuration& cfg, const ConfigParams& p) {
  // Measurement only: h may sit above the chain bound, as it does for
  // spectral configurations at moderate depth.
  p.validate_shape();
  if (!(p.h > 0 && p.h < 1)) throw ValidationError("audit: h must lie in (0, 1)");
  AuditReport rep;
  const auto& I = cfg.hull();
  const double h = p.h, lh = std::log(h), L = -lh;
  const double tol = kRel * 4;

  {
    AuditItem it{"i", true, 1.0, ""};
    it.pass = I.lo <= -p.varsigma + tol && I.hi >= p.varsigma - tol && I.lo >= -4 - tol &&
              I.hi <= 4 + tol;
    it.required_C = it.pass ? 1.0 : kInf;
    it.detail = "I = [" + fmt(I.lo) + ", " + fmt(I.hi) + "]";
    rep.items.push_back(it);
  }

  ZoneClassification zc;
  try {
    zc = classify(cfg, p);
  } catch (const NotStandardizableError& e) {
    for (const char* id : {"ii", "iii-a", "iii-b", "iv", "v", "vi"})
      rep.items.push_back({id, false, kInf, e.what()});
    rep.all_pass = false;
    rep.effective_constant = rep.measured_constant = kInf;
    return rep;
  }
  const auto central = zc.central;

  {
    Need n;
    n.add(zc.r ? bracket_log(std::log(double(zc.r)), L) : kInf, "r", 0);
    n.add(zc.s ? bracket_log(std::log(double(zc.s)), L) : kInf, "s", cfg.count() - 1);
    rep.items.push_back({"ii", true, n.req,
                         "r = " + std::to_string(zc.r) + ", s = " + std::to_string(zc.s)});
  }
  {
    Need n;
    n.add(bracket_log(cfg.band_log_len(central), lh), "|J_0|", central);
    rep.items.push_back({"iii-a", true, n.req, "|J_0| = " + fmt(cfg.band(central).length())});
  }
  {
    const auto first = cfg.band(0), last = cfg.band(cfg.count() - 1);
    // Normalization can scale by 1e6 or more, which magnifies endpoint
    // rounding well past kRel.
    const double slack = 1e-9 * I.length();
    const bool ok = std::abs(first.lo - I.lo) <= slack && std::abs(last.hi - I.hi) <= slack;
    rep.items.push_back({"iii-b", ok, ok ? 1.0 : kInf,
                         "eta_{-r} - eta = " + fmt(first.lo - I.lo) +
                             ", xi - xi_s = " + fmt(I.hi - last.hi)});
  }

  Need inner, outer, middle;
  inner.add(zc.r1 ? bracket_log(std::log(double(zc.r1)), std::log(L)) : kInf, "r_1", central);
  inner.add(zc.s1 ? bracket_log(std::log(double(zc.s1)), std::log(L)) : kInf, "s_1", central);

  auto check_band = [&](Zone z, std::uint64_t i) {
    const double lj = cfg.band_log_len(i);
    const auto g = inner_gap(cfg, i, central);
    const double lg = std::log(g.len);
    if (z == Zone::Inner) {
      inner.add(bracket_log(lj, lh - std::log(L)), "inner length", i);
      inner.add(std::max(std::exp(lh - std::log(L) - lg), std::exp(lg - lh)), "inner gap", i);
    } else if (z == Zone::Middle) {
      const auto b = cfg.band(i);
      const double c = std::abs(0.5 * (b.lo + b.hi));
      const double gc = std::abs(g.centre);
      if (!(c > 0 && c < 1) || !(gc > 0 && gc < 1)) {
        middle.add(kInf, "middle centre outside (0,1)", i);
        return;
      }
      const double llc = std::log(-std::log(c));
      // -|c| C/h - log C <= log|J| - log h + log(-log|c|)
      middle.add(solve_monotone([&](double C) { return -c * C / h - std::log(C); },
                                lj - lh + llc, true),
                 "middle length (lower)", i);
      // -|c|/(Ch) + log C >= log|J| - log h + log(-log|c|)
      middle.add(solve_monotone([&](double C) { return -c / (C * h) + std::log(C); },
                                lj - lh + llc, false),
                 "middle length (upper)", i);
      middle.add(bracket_log(lg + std::log(-std::log(gc)), lh), "middle gap", i);
    } else {
      // Lengths e^{-C/h} <= |J| <= e^{-1/(Ch)}.
      outer.add(std::max(-h * lj, lj < 0 ? 1.0 / (h * -lj) : kInf), "outer length", i);
      outer.add(bracket_log(lg, lh), "outer gap", i);
    }
  };

  for (const auto& rg : zc.ranges) {
    // Split around the central band, which carries no gap condition.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> parts;
    if (rg.first <= central && central <= rg.last) {
      if (rg.first < central) parts.push_back({rg.first, central - 1});
      if (central < rg.last) parts.push_back({central + 1, rg.last});
    } else {
      parts.push_back({rg.first, rg.last});
    }
    for (auto [a, b] : parts) {
      // Conditions are monotone or concave along a run, so the extremes
      // sit at the part ends; the band next to each end covers the change
      // from the boundary gap to the run gap.
      std::vector<std::uint64_t> cand{a, b};
      if (a + 1 <= b) cand.push_back(a + 1);
      if (b >= a + 1) cand.push_back(b - 1);
      if (rg.zone == Zone::Middle && b > a) {
        // Interior maximum of the lower middle-length condition.
        const auto& u = cfg.runs()[rg.run];
        const double cstar = solve_c_log(h / std::max(p.C, middle.req));
        const auto base = cfg.run_offset(rg.run);
        for (double sgn : {1.0, -1.0}) {
          const double x = sgn * cstar - 0.5 * u.len();
          double j = std::round((x - u.lo) / u.step);
          j = std::clamp(j, static_cast<double>(a - base), static_cast<double>(b - base));
          cand.push_back(base + static_cast<std::uint64_t>(j));
        }
      }
      for (auto i : cand) check_band(rg.zone, i);
    }
  }
  rep.items.push_back({"iv", true, inner.req, inner.where});
  rep.items.push_back({"v", true, outer.req, outer.where});
  rep.items.push_back({"vi", true, middle.req, middle.where});

  rep.measured_constant = 1.0;
  rep.all_pass = true;
  for (auto& it : rep.items) {
    if (it.id != "i" && it.id != "iii-b") it.pass = it.required_C <= p.C * (1 + 1e-9);
    if (it.id == "ii" || it.id == "iii-a" || it.id == "iv" || it.id == "v" || it.id == "vi")
      it.detail += (it.detail.empty() ? "" : "; ") + std::string("needs C >= ") +
                   fmt(it.required_C);
    rep.measured_constant = std::max(rep.measured_constant, it.required_C);
    rep.all_pass = rep.all_pass && it.pass;
  }
  rep.effective_constant = std::max(p.C, rep.measured_constant);
  return rep;
}

namespace {

struct GapEntry {
  double width;
  std::uint64_t after;         // band index before the gap
  std::uint64_t multiplicity;  // identical gaps inside one run
};

// Cuts the runs so that every index in `cuts` starts a new run.
std::vector<BandRun> split_runs(const Configuration& cfg, const std::vector<std::uint64_t>& cuts) {
  std::vector<BandRun> out;
  std::size_t c = 0;
  for (std::size_t k = 0; k < cfg.runs().size(); ++k) {
    auto u = cfg.runs()[k];
    std::uint64_t start = cfg.run_offset(k);
    while (c < cuts.size() && cuts[c] <= start) ++c;
    while (c < cuts.size() && cuts[c] < start + u.count) {
      const std::uint64_t take = cuts[c] - start;
      BandRun head = u;
      head.count = take;
      out.push_back(head);
      u.lo = u.band_lo(take);
      u.count -= take;
      start += take;
      ++c;
    }
    out.push_back(u);
  }
  return out;
}

std::vector<Block> infer_blocks(const Configuration& cfg, std::size_t k,
                                std::vector<BandRun>& runs_out) {
  std::vector<GapEntry> gaps;
  for (std::size_t r = 0; r < cfg.runs().size(); ++r) {
    const auto& u = cfg.runs()[r];
    if (u.count > 1) gaps.push_back({u.gap(), cfg.run_offset(r), u.count - 1});
    if (r + 1 < cfg.runs().size())
      gaps.push_back({cfg.runs()[r + 1].lo - u.last_hi(), cfg.run_offset(r + 1) - 1, 1});
  }
  std::sort(gaps.begin(), gaps.end(),
            [](const GapEntry& a, const GapEntry& b) { return a.width > b.width; });
  std::vector<std::uint64_t> cuts;
  std::uint64_t taken = 0;
  double last_taken = kInf;
  for (const auto& g : gaps) {
    if (taken == k - 1) {
      if (g.width * 1.01 >= last_taken)
        throw RequiresExplicitGroupingError("block inference: gap widths tie at the cut");
      break;
    }
    if (g.multiplicity > 1 || taken + g.multiplicity > k - 1)
      throw RequiresExplicitGroupingError("block inference: repeated gap widths at the cut");
    cuts.push_back(g.after + 1);
    last_taken = g.width;
    taken += g.multiplicity;
  }
  if (taken < k - 1)
    throw RequiresExplicitGroupingError("block inference: fewer gaps than blocks");
  std::sort(cuts.begin(), cuts.end());
  runs_out = split_runs(cfg, cuts);

  std::vector<Block> blocks;
  std::size_t r = 0;
  std::uint64_t idx = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::uint64_t end = b + 1 < k ? cuts[b] : cfg.count();
    Block blk;
    blk.run_begin = r;
    std::uint64_t first_idx = idx;
    while (idx < end) idx += runs_out[r++].count;
    blk.run_end = r;
    blk.hull = {runs_out[blk.run_begin].lo, runs_out[blk.run_end - 1].last_hi()};
    // Central band: the longest one (the central band dominates every
    // other band once -log h > C^2), nearest the block midpoint on ties.
    const double mid = 0.5 * (blk.hull.lo + blk.hull.hi);
    double best_len = -kInf, best_d = kInf;
    std::uint64_t at = first_idx;
    for (std::size_t q = blk.run_begin; q < blk.run_end; ++q) {
      const auto& u = runs_out[q];
      double j = u.count > 1 ? std::round((mid - u.lo) / u.step) : 0.0;
      j = std::clamp(j, 0.0, static_cast<double>(u.count - 1));
      const auto jj = static_cast<std::uint64_t>(j);
      const double d = std::abs(u.band_lo(jj) - mid);
      if (u.log_len > best_len || (u.log_len == best_len && d < best_d)) {
        best_len = u.log_len;
        best_d = d;
        at = first_idx + jj;
      }
      first_idx += u.count;
    }
    blk.central = at;
    blocks.push_back(blk);
  }
  return blocks;
}

}  // namespace

AuditReport audit_k_rho(const Configuration& cfg, std::size_t k, double rho,
                        const ConfigParams& p) {
  if (k < 1) throw ValidationError("audit_k_rho: k must be >= 1");
  if (!(rho > 0 && rho < 1)) throw ValidationError("audit_k_rho: rho must lie in (0, 1)");
  Configuration grouped = cfg;
  if (cfg.blocks().size() != k) {
    if (k == 1) {
      grouped = Configuration(cfg.hull(), cfg.runs(), {});
    } else {
      std::vector<BandRun> runs;
      auto blocks = infer_blocks(cfg, k, runs);
      grouped = Configuration(cfg.hull(), std::move(runs), std::move(blocks));
    }
  }

  AuditReport rep;
  const double I = grouped.hull().length();
  AuditItem ratio{"i", true, 1.0, ""};
  double lo_ratio = kInf, hi_ratio = 0;
  for (const auto& b : grouped.blocks()) {
    const double x = b.hull.length() / I;
    lo_ratio = std::min(lo_ratio, x);
    hi_ratio = std::max(hi_ratio, x);
  }
  const double kk = static_cast<double>(k);
  ratio.pass = lo_ratio >= rho / kk * (1 - kRel) && hi_ratio <= 1 / (rho * kk) * (1 + kRel);
  ratio.required_C = ratio.pass ? 1.0 : kInf;
  ratio.detail = "|I_i|/|I| in [" + fmt(lo_ratio) + ", " + fmt(hi_ratio) + "], allowed [" +
                 fmt(rho / kk) + ", " + fmt(1 / (rho * kk)) + "]";
  rep.items.push_back(ratio);
  rep.all_pass = ratio.pass;
  rep.measured_constant = ratio.required_C;

  for (std::size_t b = 0; b < grouped.blocks().size(); ++b) {
    const std::string prefix = "block" + std::to_string(b) + ":";
    AuditReport sub;
    try {
      sub = audit_standard(normalize_to_standard(grouped.block(b), p.varsigma).cfg, p);
    } catch (const NotStandardizableError& e) {
      sub.items.push_back({"frame", false, kInf, e.what()});
      sub.all_pass = false;
      sub.measured_constant = kInf;
    }
    for (auto it : sub.items) {
      it.id = prefix + it.id;
      rep.items.push_back(it);
    }
    rep.all_pass = rep.all_pass && sub.all_pass;
    rep.measured_constant = std::max(rep.measured_constant, sub.measured_constant);
  }
  rep.effective_constant = std::max(p.C, rep.measured_constant);
  return rep;
}

// -------------------------------------------------------------- delta sums

DeltaSum delta_sum(const Configuration& cfg, const ConfigParams& p, double delta) {
  if (!(delta > 0 && delta < 1)) throw ValidationError("delta must lie in (0, 1)");
  const auto zc = classify(cfg, p);
  const double lI = std::log(cfg.hull().length());
  Neumaier in, out, mid;
  for (const auto& r : zc.ranges) {
    const double term =
        static_cast<double>(r.size()) * std::exp(delta * (cfg.runs()[r.run].log_len - lI));
    (r.zone == Zone::Inner ? in : r.zone == Zone::Middle ? mid : out).add(term);
  }
  DeltaSum d{0.0, in.value(), out.value(), mid.value()};
  d.total = d.in + d.out + d.mid;
  return d;
}

double delta_sum_total(const Configuration& cfg, double delta) {
  if (!(delta > 0 && delta <= 1)) throw ValidationError("delta must lie in (0, 1]");
  const double lI = std::log(cfg.hull().length());
  Neumaier s;
  for (const auto& u : cfg.runs())
    s.add(static_cast<double>(u.count) * std::exp(delta * (u.log_len - lI)));
  return s.value();
}

std::pair<double, double> log_ratio_range(const Configuration& cfg) {
  const double lI = std::log(cfg.hull().length());
  double lo = kInf, hi = -kInf;
  for (const auto& u : cfg.runs()) {
    lo = std::min(lo, u.log_len - lI);
    hi = std::max(hi, u.log_len - lI);
  }
  return {lo, hi};
}

// --------------------------------------------------------------- threshold

namespace {

bool hat_conditions(double C, double h) {
  if (!(h > 0 && h < 1)) return false;
  const bool a = -1.0 / (C * h) <= std::log(C * h);
  const bool b = -C / h <= -C / (10 * h) + std::log(h) - std::log(C) - std::log(-std::log(h));
  return a && b;
}

}  // namespace

double h_hat(double C) {
  if (!(C > 1)) throw ValidationError("h_hat: C must exceed 1");
  const double top = std::min(1.0 / C, std::exp(-1.0 / C));
  // Both conditions hold for all small h; find where they first fail
  // scanning upward, so the result is a lower end of every failure.
  double lo = 1e-300;
  double h = lo;
  while (h < top) {
    const double next = std::min(top, h * 1.05);
    if (!hat_conditions(C, next)) {
      double a = h, b = next;
      while (b / a > 1 + 1e-9) {
        const double m = std::sqrt(a * b);
        (hat_conditions(C, m) ? a : b) = m;
      }
      return a;
    }
    if (next == top) break;
    h = next;
  }
  return top;
}

double h_tilde(const ConfigParams& p, double rho) {
  return std::min(h_hat(p.C), 2 * rho * p.varsigma / (10 * p.C));
}

const char* Majorants::binding() const {
  if (in >= out && in >= mid) return "in";
  return out >= mid ? "out" : "mid";
}

Majorants zone_majorants(double delta, unsigned kappa, double rho, const ConfigParams& p,
                         double h) {
  const double C = p.C;
  const double lh = std::log(h), nl = -lh;
  Majorants m;
  m.target = std::pow(2 * p.varsigma * rho, delta) / (3.0 * kappa);
  m.in = std::pow(C * h, delta) + 2 * C * nl * std::pow(C * h / nl, delta);
  m.out = std::exp(std::log(2 * C / h) - delta / (C * h));
  // Levels e^{-l-1} < |c| <= e^{-l}, l = 1..L with e^{-L-1} < h <= e^{-L}.
  const int L = static_cast<int>(std::floor(nl));
  Neumaier mid;
  for (int l = 1; l <= L; ++l) {
    const double dl = l;
    const double log_count = std::log(6 * C * dl) - dl - lh;
    const double log_size =
        std::log(C) - std::exp(double(L - l)) / (std::numbers::e * C) + lh - std::log(dl);
    mid.add(std::exp(log_count + delta * log_size));
  }
  m.mid = mid.value();
  return m;
}

Threshold h_threshold(double delta, unsigned kappa, double rho, const ConfigParams& p) {
  if (!(delta > 0 && delta < 1)) throw ValidationError("h_threshold: delta must lie in (0, 1)");
  if (kappa < 1) throw ValidationError("h_threshold: kappa must be >= 1");
  if (!(rho > 0 && rho < 1)) throw ValidationError("h_threshold: rho must lie in (0, 1)");
  p.validate_shape();
  Threshold t;
  t.h_max = std::min(h_tilde(p, rho), p.h_chain() * (1 - 1e-12));
  auto holds = [&](double h) { return zone_majorants(delta, kappa, rho, p, h).holds(); };

  const double step = std::exp2(-1.0 / 8);
  double prev = t.h_max;
  if (holds(prev)) {
    t.h = prev;
  } else {
    double h = prev * step;
    while (h > 1e-300 && !holds(h)) {
      prev = h;
      h *= step;
    }
    if (!(h > 1e-300)) {
      const auto m = zone_majorants(delta, kappa, rho, p, prev);
      throw InfeasibleError(m.binding(), "no h in (1e-300, " + fmt(t.h_max) +
                                             "] satisfies the zone majorants");
    }
    double a = h, b = prev;
    while (b / a > 1 + 1e-3) {
      const double m = std::sqrt(a * b);
      (holds(m) ? a : b) = m;
    }
    t.h = a;
  }
  t.at_h = zone_majorants(delta, kappa, rho, p, t.h);
  return t;
}

// -------------------------------------------------------------- generation

namespace {

// One side (x > 0) of a standard configuration, outward from the central
// band's right end x0. `tight` pins the outer end at exactly varsigma.
std::optional<std::vector<BandRun>> gen_side(const ConfigParams& p, Rng& rng, double x0,
                                             bool tight) {
  const double C = p.C, h = p.h, L = -std::log(h), Mh = p.M * h;
  std::vector<BandRun> runs;

  // Inner zone: s1 bands of one length; the gap is solved so that the last
  // one ends tau below Mh, with tau half the narrowest middle gap, so the
  // first middle band clears Mh without an oversized gap.
  const double m = std::min(2.0, std::sqrt(C));
  auto s_lo = static_cast<std::uint64_t>(std::ceil(L / C * m));
  auto s_hi = static_cast<std::uint64_t>(std::floor(C * L / m));
  if (s_lo > s_hi) {
    s_lo = static_cast<std::uint64_t>(std::ceil(L / C));
    s_hi = static_cast<std::uint64_t>(std::floor(C * L));
  }
  if (s_lo < 1) s_lo = 1;
  if (s_lo > s_hi) return std::nullopt;
  const std::uint64_t s1 = rng.integer(s_lo, s_hi);
  const double len_in = draw_inside(rng, h / (C * L), C * h / L);
  const double tau = 0.5 * h / (C * -std::log(Mh));
  const double n1 = static_cast<double>(s1);
  const double g_in = (Mh - tau - x0) / n1 - len_in;
  if (!(g_in > h / (C * L) && g_in < C * h)) return std::nullopt;
  runs.push_back({x0 + g_in, std::log(len_in), g_in + len_in, s1});

  // Middle zone: segments of ratio sqrt(C) in the centre variable, each a
  // run whose length and gap fit the windows over the whole segment.
  const double gamma = h / (4 * C);
  const double end = p.epsilon - gamma;
  double a = runs.back().last_hi();
  std::uint64_t used = s1;
  while (a < end) {
    double b = a * std::sqrt(C);
    if (b >= end / std::pow(C, 0.25)) b = end;
    auto lower = [&](double c) { return -c * C / h + std::log(h / C) - std::log(-std::log(c)); };
    auto upper = [&](double c) { return -c / (C * h) + std::log(C * h) - std::log(-std::log(c)); };
    double lmax = std::max(lower(a), lower(b));
    const double cs = solve_c_log(h / C);
    if (cs > a && cs < b) lmax = std::max(lmax, lower(cs));
    const double umin = std::min(upper(a), upper(b));
    if (!(lmax < umin)) return std::nullopt;
    const double log_len = draw_inside_log(rng, lmax, umin);
    const double len = std::exp(log_len);
    const double g_lo = h / (C * -std::log(b)), g_hi = C * h / -std::log(a);
    if (!(g_lo < g_hi)) return std::nullopt;
    const double g_target = draw_inside(rng, g_lo, g_hi);
    const double n = std::max(1.0, std::round((b - a) / (g_target + len)));
    const double g = (b - a) / n - len;
    if (!(g > g_lo && g < g_hi)) return std::nullopt;
    const auto cnt = static_cast<std::uint64_t>(n);
    runs.push_back({a + g, log_len, g + len, cnt});
    used += cnt;
    a = b == end ? end : runs.back().last_hi();
    if (b == end) break;
  }
  const double x2 = runs.back().last_hi();

  // Outer zone: one run reaching xi; the count and gap share the budget
  // s in [1/(Ch), C/h] and the extent xi - x2.
  const double log_len_out = draw_inside_log(rng, -C / h, -1.0 / (C * h));
  const double len_out = std::exp(log_len_out);
  const double xi_lo = p.varsigma, xi_hi = tight ? p.varsigma : 4.0;
  const double used_d = static_cast<double>(used);
  const double n_lo = std::max({1.0, std::ceil(1.0 / (C * h)) - used_d,
                                std::ceil((xi_lo - x2) / (C * h + len_out))});
  const double n_hi =
      std::min(std::floor(C / h) - used_d, std::floor((xi_hi - x2) / (h / C + len_out)));
  if (!(n_lo <= n_hi)) return std::nullopt;
  const double n_out = std::round(n_lo < n_hi ? draw_inside(rng, n_lo, n_hi) : n_lo);
  const double g_lo = std::max(h / C, (xi_lo - x2) / n_out - len_out);
  const double g_hi = std::min(C * h, (xi_hi - x2) / n_out - len_out);
  if (!(g_lo <= g_hi)) return std::nullopt;
  const double g_out = tight ? (p.varsigma - x2) / n_out - len_out
                             : (g_lo < g_hi ? draw_inside(rng, g_lo, g_hi) : g_lo);
  runs.push_back({x2 + g_out, log_len_out, g_out + len_out, static_cast<std::uint64_t>(n_out)});
  return runs;
}

}  // namespace

Configuration gen_standard(const ConfigParams& p, std::uint64_t seed) {
  p.validate();
  std::string last_failure = "window construction failed";
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Rng rng(derive_seed(seed, {attempt}));
    const double len0 = draw_inside(rng, p.h / p.C, p.C * p.h);
    const bool right_tight = rng.uniform() < 0.5;
    auto right = gen_side(p, rng, 0.5 * len0, right_tight);
    auto left = gen_side(p, rng, 0.5 * len0, !right_tight);
    if (!right || !left) continue;

    std::vector<BandRun> runs;
    std::uint64_t central = 0;
    for (auto it = left->rbegin(); it != left->rend(); ++it) {
      BandRun u = *it;
      u.lo = -it->last_hi();
      runs.push_back(u);
      central += u.count;
    }
    runs.push_back({-0.5 * len0, std::log(len0), len0, 1});
    runs.insert(runs.end(), right->begin(), right->end());
    const Interval hull{runs.front().lo, runs.back().last_hi()};
    const std::size_t nruns = runs.size();
    Configuration cfg(hull, std::move(runs), {Block{0, nruns, hull, central}});
    const auto rep = audit_standard(cfg, p);
    if (rep.all_pass) return cfg;
    for (const auto& item : rep.items)
      if (!item.pass) last_failure = "item " + item.id + ": " + item.detail;
  }
  throw GenerationInfeasibleError("gen_standard: no admissible configuration for these "
                                  "parameters (" + last_failure + ")");
}

Configuration gen_k_rho(const ConfigParams& p, std::size_t k, double rho, Interval hull,
                        std::uint64_t seed) {
  if (k < 1) throw ValidationError("gen_k_rho: k must be >= 1");
  if (!(rho > 0 && rho < 1)) throw ValidationError("gen_k_rho: rho must lie in (0, 1)");
  if (!(hull.lo < hull.hi)) throw InvalidIntervalError("gen_k_rho: empty hull");
  const double kk = static_cast<double>(k);
  const double total = hull.length();

  std::vector<double> u(k, 1.0);
  std::vector<double> gaps;
  if (k > 1) {
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 256 && !ok; ++attempt) {
      Rng rng(derive_seed(seed, {0xb10c, attempt}));
      double sum = 0;
      for (auto& x : u) {
        x = draw_inside(rng, rho / kk, 1 / (rho * kk));
        sum += x;
      }
      if (sum > 0.95) {
        const double f = 0.95 / sum;
        for (auto& x : u) x *= f;
      }
      ok = *std::min_element(u.begin(), u.end()) > rho / kk;
      gaps.assign(k - 1, 0.0);
      double gsum = 0;
      for (auto& g : gaps) gsum += (g = rng.uniform(0.5, 1.5));
      double free = 1.0;
      for (double x : u) free -= x;
      for (auto& g : gaps) g *= free / gsum;
    }
    if (!ok) throw GenerationInfeasibleError("gen_k_rho: no admissible block ratios");
  }

  std::vector<BandRun> runs;
  std::vector<Block> blocks;
  std::uint64_t offset = 0;
  double cursor = hull.lo;
  for (std::size_t i = 0; i < k; ++i) {
    const auto std_cfg = gen_standard(p, derive_seed(seed, {i}));
    const double A = cursor;
    const double B = i + 1 == k ? hull.hi : A + u[i] * total;
    const double scale = (B - A) / std_cfg.hull().length();
    const auto mapped = std_cfg.affine(scale, A - scale * std_cfg.hull().lo);
    Block b{runs.size(), runs.size() + mapped.runs().size(), {A, B},
            offset + mapped.blocks().front().central};
    runs.insert(runs.end(), mapped.runs().begin(), mapped.runs().end());
    blocks.push_back(b);
    offset += mapped.count();
    if (i + 1 < k) cursor = B + gaps[i] * total;
  }
  return Configuration(hull, std::move(runs), std::move(blocks));
}

Configuration config_from_spectra(const BandSet& coarse, const BandSet& fine, std::size_t index) {
  if (index >= coarse.size()) throw ValidationError("config_from_spectra: band index out of range");
  std::vector<Interval> chosen;
  for (const auto& v : fine) {
    const double mid = 0.5 * (v.lo + v.hi);
    // Owner: the coarse band containing the midpoint, else the nearest.
    std::size_t best = 0;
    double d = kInf;
    for (std::size_t c = 0; c < coarse.size(); ++c) {
      const double e = coarse[c].contains(mid) ? 0.0
                                               : std::min(std::abs(coarse[c].lo - mid),
                                                          std::abs(coarse[c].hi - mid));
      if (e < d) {
        d = e;
        best = c;
      }
    }
    if (best == index) chosen.push_back(v);
  }
  if (chosen.empty())
    throw EmptySetError("config_from_spectra: no fine band falls in coarse band " +
                        std::to_string(index));
  return Configuration::from_intervals({chosen.front().lo, chosen.back().hi}, chosen);
}

}  // namespace harperlab
