// harperlab: command-line front end. Every subcommand writes one data file
// (or stdout) plus a "<out>.meta.json" provenance sidecar.

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "harperlab/chambers.hpp"
#include "harperlab/config.hpp"
#include "harperlab/contfrac.hpp"
#include "harperlab/dimension.hpp"
#include "harperlab/errors.hpp"
#include "harperlab/io.hpp"
#include "harperlab/moran.hpp"
#include "harperlab/multidim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace harperlab;

namespace {

struct Common {
  int jobs = 0;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
};

struct Result {
  std::string data;
  json params = json::object();
  json error_radii = json::array();
  json results = json::object();
};

int default_jobs() {
  if (const char* env = std::getenv("HARPERLAB_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j > 0) return j;
    } catch (const std::exception&) {
    }
    throw ValidationError("HARPERLAB_JOBS must be a positive integer");
  }
  return omp_get_num_procs();
}

RationalFrequency parse_pq(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw ValidationError("--pq expects p/q, got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    const long long p = std::stoll(text.substr(0, slash), &a);
    const long long q = std::stoll(text.substr(slash + 1), &b);
    if (a != slash || b != text.size() - slash - 1) throw std::invalid_argument("trailing");
    return RationalFrequency(p, q);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError("--pq expects p/q, got '" + text + "'");
  }
}

std::uint64_t leading_period(const ContinuedFraction& cf) {
  return cf.period().size() == 1 && cf.prefix().empty() ? cf.period().front() : 0;
}

ScaleWindow parse_window(const std::string& text, std::size_t grid) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ValidationError("--window expects 'auto' or r_min:r_max, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1)), grid};
  } catch (const std::exception&) {
    throw ValidationError("--window expects 'auto' or r_min:r_max, got '" + text + "'");
  }
}

std::string bands_out(const BandSet& s, const std::string& format) {
  return format == "json" ? bandset_json(s).dump(1) + "\n" : bandset_csv(s);
}

// ---------------------------------------------------------------- subcommands

struct ButterflyArgs {
  std::int64_t qmax = 10;
};
Result run_butterfly(const ButterflyArgs& a, const Common& c) {
  if (a.qmax < 1) throw ValidationError("--qmax must be >= 1");
  const auto entries = butterfly(a.qmax);
  Result r;
  r.data = c.format == "json" ? butterfly_json(entries).dump(1) + "\n" : butterfly_csv(entries);
  r.params = {{"qmax", a.qmax}};
  r.results = {{"spectra", entries.size()}};
  return r;
}

struct SpectrumArgs {
  std::string pq, cf;
  std::optional<std::size_t> depth;
};
Result run_spectrum(const SpectrumArgs& a, const Common& c) {
  Result r;
  if (!a.pq.empty() == !a.cf.empty()) throw ValidationError("spectrum needs exactly one of --pq, --cf");
  if (!a.pq.empty()) {
    const auto f = parse_pq(a.pq);
    r.data = bands_out(spectrum_rational(f), c.format);
    r.params = {{"pq", std::to_string(f.p) + "/" + std::to_string(f.q)}};
    r.error_radii.push_back(0.0);
    return r;
  }
  const auto cf = ContinuedFraction::parse(a.cf);
  const auto depth = a.depth.value_or(deepest_convergent(cf, 10'000));
  const auto s = spectrum_approx(cf, depth);
  r.data = bands_out(s.bands, c.format);
  r.params = {{"cf", cf.str()}, {"depth", depth}};
  r.error_radii.push_back(s.error_radius);
  r.results = {{"p", s.convergent.p}, {"q", s.convergent.q}, {"bands", s.bands.size()}};
  return r;
}

struct DimsArgs {
  std::string cf;
  std::vector<std::uint64_t> a_values;
  std::optional<std::size_t> depth;
  std::string window = "auto";
  std::size_t grid = 16;
  std::int64_t qcap = 10'000;
};
Result run_dims(const DimsArgs& a, const Common& c) {
  Result r;
  std::vector<TrendRow> rows;
  if (!a.a_values.empty()) {
    if (!a.cf.empty()) throw ValidationError("dims takes either --cf or --a, not both");
    if (a.window != "auto") throw ValidationError("--a runs use the automatic window");
    TrendOptions opt;
    opt.q_cap = a.qcap;
    opt.grid = a.grid;
    rows = dim_trend_experiment(a.a_values, opt);
    r.params = {{"a", a.a_values}, {"qcap", a.qcap}, {"grid", a.grid}, {"window", "auto"}};
  } else {
    if (a.cf.empty()) throw ValidationError("dims needs --cf or --a");
    const auto cf = ContinuedFraction::parse(a.cf);
    const auto depth = a.depth.value_or(deepest_convergent(cf, a.qcap));
    const auto s = spectrum_approx(cf, depth);
    ScaleWindow w;
    if (a.window == "auto") {
      w = auto_window(s.bands, s.error_radius, a.grid);
    } else {
      w = parse_window(a.window, a.grid);
      check_window(w, s.error_radius);
    }
    const auto e = box_dim_fit(s.bands, w);
    rows.push_back({leading_period(cf), s.convergent.q, s.error_radius, e.slope, e.slope_max,
                    e.slope_min, w.r_min, w.r_max});
    r.params = {{"cf", cf.str()}, {"depth", depth}, {"grid", a.grid}, {"window", a.window}};
    r.results = {{"intercept", e.intercept}, {"residual", e.residual}};
  }
  for (const auto& row : rows) r.error_radii.push_back(row.error_radius);
  r.data = c.format == "json" ? trend_json(rows).dump(1) + "\n" : trend_csv(rows);
  return r;
}

struct AuditArgs {
  std::string bands;
  std::string params = "{}";
  std::optional<std::size_t> k;
  double rho = 0.5;
};
Result run_audit(const AuditArgs& a, const Common& c) {
  const auto text = read_text(a.bands);
  BandSet s;
  if (fs::path(a.bands).extension() == ".json") {
    const json bj = json::parse(text, nullptr, false);
    if (bj.is_discarded()) throw ValidationError("bands file is not valid JSON");
    s = bandset_from_json(bj);
  } else {
    s = parse_bandset_csv(text);
  }
  json pj = json::parse(a.params, nullptr, false);
  if (pj.is_discarded()) throw ValidationError("--params is not valid JSON");
  const auto p = params_from_json(pj);
  const auto cfg = Configuration::from_intervals(s.hull(), s.intervals());
  AuditReport rep;
  json extra = json::object();
  if (a.k) {
    rep = audit_k_rho(cfg, *a.k, a.rho, p);
    extra = {{"k", *a.k}, {"rho", a.rho}};
  } else {
    const auto st = normalize_to_standard(cfg, p.varsigma);
    rep = audit_standard(st.cfg, p);
    extra = {{"map", {{"scale", st.map.scale}, {"shift", st.map.shift}}}};
  }
  Result r;
  auto j = audit_json(rep);
  j["params"] = params_json(p);
  for (const auto& [key, v] : extra.items()) j[key] = v;
  if (c.format == "json") {
    r.data = j.dump(1) + "\n";
  } else {
    r.data = "id,pass,required_C,detail\n";
    for (const auto& it : rep.items) {
      std::string detail = it.detail;
      for (auto& ch : detail)
        if (ch == ',' || ch == '\n') ch = ';';
      r.data += it.id + "," + (it.pass ? "true" : "false") + "," + format_double(it.required_C) +
                "," + detail + "\n";
    }
  }
  r.params = {{"bands", a.bands}, {"config", params_json(p)}};
  r.results = {{"all_pass", rep.all_pass}};
  return r;
}

struct MoranArgs {
  double delta = 0.5;
  std::size_t depth = 5;
  double h = 1e-3;
  unsigned kappa = 1;
  double rho = 0.5;
  std::string rule = "standard";
  std::size_t dump_depth = 1;
  double min_len = 0.0;
  std::string params = "{}";
};
Result run_moran(const MoranArgs& a, const Common& c) {
  ExpansionRule rule;
  Interval root{0.0, 1.0};
  json pj = json::parse(a.params, nullptr, false);
  if (pj.is_discarded()) throw ValidationError("--params is not valid JSON");
  auto p = params_from_json(pj);
  if (a.rule == "standard") {
    p.h = a.h;
    p.validate();
    const double h = a.h;
    rule = standard_rule(p, a.kappa, a.rho, [h](std::size_t) { return h; });
    root = {-4.0, 4.0};
  } else if (a.rule == "toy") {
    rule = toy_rule(2, 0.1);
  } else {
    throw ValidationError("--rule must be 'standard' or 'toy'");
  }
  const auto nc = NestedCovering::build(rule, a.depth, c.seed, root);
  const auto cert = hausdorff_certificate(nc, a.delta);
  const auto nodes = list_nodes(nc, a.dump_depth, a.min_len);
  Result r;
  if (c.format == "json") {
    r.data = node_lines(nodes);
  } else {
    r.data = "word,type,k,h,lo,hi\n";
    for (const auto& n : nodes)
      r.data += n.word + "," + std::to_string(n.type) + "," + std::to_string(n.k) + "," +
                format_double(n.h) + "," + format_double(n.lo) + "," + format_double(n.hi) + "\n";
  }
  r.params = {{"delta", a.delta}, {"depth", a.depth},         {"h", a.h},
              {"kappa", a.kappa}, {"rho", a.rho},             {"rule", a.rule},
              {"dump_depth", a.dump_depth}, {"min_len", a.min_len}, {"config", params_json(p)}};
  json counts = json::array();
  for (auto n : nc.level_counts()) counts.push_back(static_cast<double>(n));
  r.results = {{"certificate", certificate_json(cert)},
               {"level_counts", counts},
               {"max_ratio", nc.max_ratio()}};
  return r;
}

struct MdArgs {
  std::size_t d = 2;
  std::string cf;
  std::vector<std::uint64_t> a_values;
  std::optional<std::size_t> depth;
  std::int64_t qcap = 10'000;
  std::size_t max_intervals = 100'000;
};
Result run_mdsum(const MdArgs& a, const Common& c) {
  Result r;
  MdOptions md;
  md.max_intervals = a.max_intervals;
  if (!a.a_values.empty()) {
    if (!a.cf.empty()) throw ValidationError("mdsum takes either --cf or --a, not both");
    CollapseOptions opt;
    opt.d = a.d;
    opt.depth = a.depth;
    opt.q_cap = a.qcap;
    opt.md = md;
    const auto rows = collapse_report(a.a_values, opt);
    r.data = c.format == "json" ? collapse_json(rows).dump(1) + "\n" : collapse_csv(rows);
    json prov = json::array();
    for (const auto& row : rows) {
      r.error_radii.push_back(row.slope_error_radius);
      prov.push_back({{"a", row.a},
                      {"measure_depth", row.measure_depth},
                      {"measure_q", row.measure_q},
                      {"slope_q", row.slope_q},
                      {"r_min", row.r_min},
                      {"r_max", row.r_max}});
    }
    r.params = {{"d", a.d}, {"a", a.a_values}, {"qcap", a.qcap}, {"max_intervals", a.max_intervals}};
    if (a.depth) r.params["depth"] = *a.depth;
    r.results = {{"rows", prov}};
    return r;
  }
  if (a.cf.empty()) throw ValidationError("mdsum needs --cf or --a");
  if (a.d < 1) throw ValidationError("--d must be >= 1");
  const auto cf = ContinuedFraction::parse(a.cf);
  const auto depth = a.depth.value_or(deepest_convergent(cf, a.qcap));
  const auto s = md_spectrum(std::vector<ContinuedFraction>(a.d, cf), depth, md);
  r.data = bands_out(s.bands, c.format);
  r.params = {{"d", a.d}, {"cf", cf.str()}, {"depth", depth}, {"max_intervals", a.max_intervals}};
  r.error_radii.push_back(s.error_radius);
  r.results = {{"coarsening", s.coarsening}, {"measure", s.bands.measure()}, {"q_used", s.q_used}};
  return r;
}

void emit(const std::string& sub, const Common& c, const Result& r, double seconds) {
  if (c.out.empty()) {
    std::cout << r.data;
    return;
  }
  const fs::path data = c.out;
  fs::path meta = data;
  meta += ".meta.json";
  json m{{"tool", "harperlab"},
         {"version", kVersion},
         {"subcommand", sub},
         {"seed", c.seed},
         {"format", c.format},
         {"params", r.params},
         {"error_radii", r.error_radii},
         {"results", r.results},
         {"jobs", c.jobs},
         {"wall_time_s", seconds},
         {"timestamp", static_cast<std::int64_t>(std::time(nullptr))}};
  write_text(data, r.data);
  try {
    write_text(meta, m.dump(1) + "\n");
  } catch (...) {
    std::error_code ec;
    fs::remove(data, ec);
    throw;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Almost Mathieu spectra, configurations and fractal dimensions"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub, bool has_format = true) {
    sub->add_option("--jobs", common.jobs, "Worker threads (default: HARPERLAB_JOBS or all cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "Random seed");
    if (has_format)
      sub->add_option("--format", common.format, "Output format")
          ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", common.out, "Output file (default: stdout)");
  };

  ButterflyArgs ba;
  auto* bfly = app.add_subcommand("butterfly", "Spectra of all p/q with q <= qmax");
  bfly->add_option("--qmax", ba.qmax, "Largest denominator")->required();
  add_common(bfly);

  SpectrumArgs sa;
  auto* spec = app.add_subcommand("spectrum", "Spectrum at p/q or at a convergent");
  spec->add_option("--pq", sa.pq, "Rational frequency p/q");
  spec->add_option("--cf", sa.cf, "Continued fraction, e.g. \"[(30)]\"");
  spec->add_option("--depth", sa.depth, "Convergent index (default: deepest with q <= 10^4)");
  add_common(spec);

  DimsArgs da;
  auto* dims = app.add_subcommand("dims", "Box-dimension fits");
  dims->add_option("--cf", da.cf, "Continued fraction");
  dims->add_option("--a", da.a_values, "Trend experiment over [(a)]")->delimiter(',');
  dims->add_option("--depth", da.depth, "Convergent index");
  dims->add_option("--window", da.window, "'auto' or r_min:r_max");
  dims->add_option("--grid", da.grid, "Scales in the window");
  dims->add_option("--qcap", da.qcap, "Largest convergent denominator");
  add_common(dims);

  AuditArgs aa;
  auto* audit = app.add_subcommand("config-audit", "Audit a band file as a configuration");
  audit->add_option("--bands", aa.bands, "Band set file (.csv or .json)")->required();
  audit->add_option("--params", aa.params, "JSON object with varsigma, epsilon, M, C, h");
  audit->add_option("--k", aa.k, "Audit as a (k, rho)-configuration");
  audit->add_option("--rho", aa.rho, "Block ratio parameter");
  add_common(audit);

  MoranArgs ma;
  auto* moran = app.add_subcommand("moran-sim", "Build a nested covering and certify it");
  moran->set_help_flag("--help", "Print this help message and exit");
  moran->add_option("--delta", ma.delta, "Exponent for the certificate");
  moran->add_option("--depth", ma.depth, "Tree depth");
  moran->add_option("--h", ma.h, "Scale parameter of every node");
  moran->add_option("--kappa", ma.kappa, "Largest block count");
  moran->add_option("--rho", ma.rho, "Block ratio parameter");
  moran->add_option("--rule", ma.rule, "'standard' or 'toy'");
  moran->add_option("--dump-depth", ma.dump_depth, "Deepest level in the node dump");
  moran->add_option("--min-len", ma.min_len, "Shortest node in the dump");
  moran->add_option("--params", ma.params, "JSON object with varsigma, epsilon, M, C");
  add_common(moran);

  MdArgs mda;
  auto* md = app.add_subcommand("mdsum", "Minkowski-sum spectra in d dimensions");
  md->add_option("--d", mda.d, "Number of components");
  md->add_option("--cf", mda.cf, "Continued fraction of every component");
  md->add_option("--a", mda.a_values, "Collapse report over [(a)]")->delimiter(',');
  md->add_option("--depth", mda.depth, "Convergent index");
  md->add_option("--qcap", mda.qcap, "Largest convergent denominator");
  md->add_option("--max-intervals", mda.max_intervals, "Coarsening threshold");
  add_common(md);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (common.jobs == 0) common.jobs = default_jobs();
    omp_set_num_threads(common.jobs);
    const std::string name = app.get_subcommands().front()->get_name();
    Result r;
    if (name == "butterfly") r = run_butterfly(ba, common);
    else if (name == "spectrum") r = run_spectrum(sa, common);
    else if (name == "dims") r = run_dims(da, common);
    else if (name == "config-audit") r = run_audit(aa, common);
    else if (name == "moran-sim") r = run_moran(ma, common);
    else r = run_mdsum(mda, common);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(name, common, r, secs);
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "harperlab: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "harperlab: " << e.what() << "\n";
    return 2;
  }
}
