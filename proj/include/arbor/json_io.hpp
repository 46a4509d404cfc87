#pragma once

#include <string>

#include "json.hpp"

#include "arbor/decomp.hpp"
#include "arbor/realize.hpp"
#include "arbor/report.hpp"
#include "arbor/rewrite.hpp"
#include "arbor/system.hpp"

namespace arbor {

using nlohmann::json;

json tree_to_json(const Tree& t);
Tree tree_from_json(const json& j);

/// Distance matrices go inline by default; with a nonempty sidecar stem the
/// matrix is written next to the JSON as <stem>.f64 (row-major little-endian
/// float64) and referenced by path.
json compactum_to_json(const FiniteCompactum& m, const std::string& sidecar_dir = "",
                       const std::string& sidecar_stem = "");
FiniteCompactum compactum_from_json(const json& j, const std::string& base_dir = "");

/// Schema arbor/system/v1.
json system_to_json(const TruncatedTreeSystem& sys);
TruncatedTreeSystem system_from_json(const json& j, const std::string& base_dir = "");

json splitting_to_json(const Splitting& s);
Splitting splitting_from_json(const json& j);
json decomposition_to_json(const Decomposition& c);
Decomposition decomposition_from_json(const json& j);

json report_to_json(const Report& r);

json rewrite_log_to_json(const RewriteLog& log);

/// Realization manifest (schema arbor/realization/v1) with a binary matrix
/// sidecar; also writes <stem>.obj when coordinates are present and format
/// includes "obj".
json realization_manifest(const Realization& r, const std::string& dir, const std::string& stem,
                          const std::string& format = "json");

std::string realization_obj(const Realization& r);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace arbor
