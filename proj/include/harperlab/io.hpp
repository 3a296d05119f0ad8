#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "harperlab/bandset.hpp"
#include "harperlab/chambers.hpp"
#include "harperlab/config.hpp"
#include "harperlab/dimension.hpp"
#include "harperlab/moran.hpp"
#include "harperlab/multidim.hpp"

namespace harperlab {

inline constexpr const char* kVersion = "0.1.0";

// Shortest text that reads back to the same double.
std::string format_double(double x);

// "# bandset v1", then "lo,hi", then one row per interval.
std::string bandset_csv(const BandSet& s);
// Accepts the format above; blank lines and further '#' lines are skipped.
// Throws ValidationError naming the offending line.
BandSet parse_bandset_csv(std::string_view text);
nlohmann::json bandset_json(const BandSet& s);
BandSet bandset_from_json(const nlohmann::json& j);

// "# butterfly v1", then "p,q,band_index,lo,hi".
std::string butterfly_csv(const std::vector<ButterflyEntry>& entries);
nlohmann::json butterfly_json(const std::vector<ButterflyEntry>& entries);

nlohmann::json audit_json(const AuditReport& r);
ConfigParams params_from_json(const nlohmann::json& j);
nlohmann::json params_json(const ConfigParams& p);

nlohmann::json trend_json(const std::vector<TrendRow>& rows);
nlohmann::json collapse_json(const std::vector<CollapseRow>& rows);
nlohmann::json certificate_json(const HausdorffCertificate& c);

// One JSON object per line: word, type, k, h, lo, hi.
std::string node_lines(const std::vector<NodeRecord>& nodes);

std::string read_text(const std::filesystem::path& path);
// Writes through a temporary file in the same directory and renames it.
void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace harperlab
