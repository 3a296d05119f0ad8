#include "harperlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "harperlab/errors.hpp"

namespace harperlab {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- bandsets

std::string bandset_csv(const BandSet& s) {
  std::string out = "# bandset v1\nlo,hi\n";
  for (const auto& v : s) out += format_double(v.lo) + "," + format_double(v.hi) + "\n";
  return out;
}

namespace {

double parse_number(std::string_view t, std::size_t line) {
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.remove_suffix(1);
  double x = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(x))
    throw ValidationError("bandset csv line " + std::to_string(line) + ": bad number '" +
                          std::string(t) + "'");
  return x;
}

}  // namespace

BandSet parse_bandset_csv(std::string_view text) {
  std::vector<Interval> raw;
  bool header = false, columns = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != "# bandset v1")
        throw ValidationError("bandset csv must start with '# bandset v1'");
      header = true;
      continue;
    }
    if (line.front() == '#') continue;
    if (!columns && line == "lo,hi") {
      columns = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw ValidationError("bandset csv line " + std::to_string(line_no) +
                            ": expected two columns lo,hi");
    raw.push_back({parse_number(line.substr(0, comma), line_no),
                   parse_number(line.substr(comma + 1), line_no)});
  }
  if (!header) throw ValidationError("bandset csv must start with '# bandset v1'");
  return BandSet::normalize(std::move(raw));
}

json bandset_json(const BandSet& s) {
  json bands = json::array();
  for (const auto& v : s) bands.push_back({{"lo", v.lo}, {"hi", v.hi}});
  return {{"format", "bandset v1"}, {"bands", std::move(bands)}};
}

BandSet bandset_from_json(const json& j) {
  try {
    if (j.at("format") != "bandset v1") throw ValidationError("bandset json: unknown format");
    std::vector<Interval> raw;
    for (const auto& b : j.at("bands")) raw.push_back({b.at("lo").get<double>(), b.at("hi").get<double>()});
    return BandSet::normalize(std::move(raw));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bandset json: ") + e.what());
  }
}

// ---------------------------------------------------------------- butterfly

std::string butterfly_csv(const std::vector<ButterflyEntry>& entries) {
  std::string out = "# butterfly v1\np,q,band_index,lo,hi\n";
  for (const auto& e : entries)
    for (std::size_t i = 0; i < e.bands.size(); ++i)
      out += std::to_string(e.freq.p) + "," + std::to_string(e.freq.q) + "," + std::to_string(i) +
             "," + format_double(e.bands[i].lo) + "," + format_double(e.bands[i].hi) + "\n";
  return out;
}

json butterfly_json(const std::vector<ButterflyEntry>& entries) {
  json rows = json::array();
  for (const auto& e : entries) {
    json bands = json::array();
    for (const auto& v : e.bands) bands.push_back({v.lo, v.hi});
    rows.push_back({{"p", e.freq.p}, {"q", e.freq.q}, {"bands", std::move(bands)}});
  }
  return {{"format", "butterfly v1"}, {"spectra", std::move(rows)}};
}

// ---------------------------------------------------------------- config

namespace {

// JSON has no infinity; unbounded constants are written as null.
json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json audit_json(const AuditReport& r) {
  json items = json::array();
  for (const auto& it : r.items)
    items.push_back({{"id", it.id},
                     {"pass", it.pass},
                     {"required_C", finite_or_null(it.required_C)},
                     {"detail", it.detail}});
  return {{"all_pass", r.all_pass},
          {"effective_constant", finite_or_null(r.effective_constant)},
          {"measured_constant", finite_or_null(r.measured_constant)},
          {"items", std::move(items)}};
}

ConfigParams params_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config params must be a JSON object");
  static const std::set<std::string> known{"varsigma", "epsilon", "M", "C", "h"};
  ConfigParams p;
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("config params: unknown key '" + key + "'");
    if (!value.is_number()) throw ValidationError("config params: '" + key + "' must be a number");
  }
  p.varsigma = j.value("varsigma", p.varsigma);
  p.epsilon = j.value("epsilon", p.epsilon);
  p.M = j.value("M", p.M);
  p.C = j.value("C", p.C);
  p.h = j.value("h", p.h);
  return p;
}

json params_json(const ConfigParams& p) {
  return {{"varsigma", p.varsigma}, {"epsilon", p.epsilon}, {"M", p.M}, {"C", p.C}, {"h", p.h}};
}

// ---------------------------------------------------------------- reports

json trend_json(const std::vector<TrendRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"a", r.a},
                   {"q_used", r.q_used},
                   {"error_radius", r.error_radius},
                   {"slope", r.slope},
                   {"slope_max", r.slope_max},
                   {"slope_min", r.slope_min},
                   {"r_min", r.r_min},
                   {"r_max", r.r_max}});
  return out;
}

json collapse_json(const std::vector<CollapseRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"a", r.a},
                   {"d", r.d},
                   {"measure", r.measure},
                   {"md_slope", r.md_slope},
                   {"sum_slope", r.sum_slope},
                   {"max_interior", r.max_interior}});
  return out;
}

json certificate_json(const HausdorffCertificate& c) {
  return {{"holds", c.holds},
          {"delta", c.delta},
          {"level_sums", c.level_sums},
          {"max_child_sum", c.max_child_sum},
          {"worst_node", c.worst_node}};
}

std::string node_lines(const std::vector<NodeRecord>& nodes) {
  std::string out;
  for (const auto& n : nodes) {
    json j{{"word", n.word}, {"type", n.type}, {"k", n.k}, {"h", n.h}, {"lo", n.lo}, {"hi", n.hi}};
    out += j.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- files

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      std::filesystem::remove(tmp);
      throw ValidationError("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace harperlab
