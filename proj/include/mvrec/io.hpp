#pragma once

#include "mvrec/baseforecast.hpp"
#include "mvrec/covariance.hpp"
#include "mvrec/hierarchy.hpp"
#include "mvrec/reconcile.hpp"
#include "mvrec/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mvrec::io {

/// Splits one CSV line on commas and trims surrounding whitespace. Quoting is not supported.
std::vector<std::string> split_csv_line(std::string_view line);

/// Shortest round-trip decimal representation ("%.17g" style, trimmed).
std::string format_double(double v);
/// Empty string for nullopt (undefined marker).
std::string format_optional(const std::optional<double>& v, int precision = 10);

// --- hierarchy file --------------------------------------------------------
//
// { "nodes": [ {"id": "Total"},
//              {"id": "A", "parent": "Total", "label": "Region A"}, ... ] }
//
// Exactly one entry omits "parent". Entries may appear in any order.

NodeTree hierarchy_from_json(std::string_view text);
std::string hierarchy_to_json(const NodeTree& tree);
NodeTree read_hierarchy_file(const std::filesystem::path& path);
void write_hierarchy_file(const std::filesystem::path& path, const NodeTree& tree);

// --- panel CSV -------------------------------------------------------------
//
// header: time,node,variable,value
// time: integer index or ISO month YYYY-MM. Rows may come in any order; the
// pivoted grid must be complete. Variables are ordered by first appearance.

/// Sort key of a time label: the integer itself, or year*12 + month - 1.
long parse_time_label(std::string_view label);

MultiPanel read_panel_csv(std::istream& in, const Hierarchy& h);
MultiPanel read_panel_csv(const std::filesystem::path& path, const Hierarchy& h);
void write_panel_csv(std::ostream& out, const MultiPanel& panel);

// --- residual panel CSV ----------------------------------------------------
//
// header: one "node:variable" label per column in vec order; one row per time.
// Empty or non-numeric cells read as NaN and drop the row.

ResidualPanel read_residual_csv(std::istream& in);
void write_residual_csv(std::ostream& out, const ResidualPanel& r);

// --- external forecast bundle ----------------------------------------------
//
// manifest.json: {"forecasts": "forecasts.csv", "residuals": "residuals.csv",
//                 "provenance": "...", "variables": ["adm", "dis"]}
// forecasts.csv: origin,horizon,node,variable,value
// residuals.csv: time,node,variable,value
// Paths are relative to the manifest. "variables" is optional; otherwise the
// order of first appearance in forecasts.csv is used.

struct LoadedBundle {
    ExternalForecastBundle bundle;
    std::vector<std::string> variables;
};

LoadedBundle read_bundle(const std::filesystem::path& manifest, const Hierarchy& h);
void write_bundle(const std::filesystem::path& dir, const ExternalForecastBundle& bundle, const Hierarchy& h,
                  const std::vector<std::string>& variables);

// --- reconciled output -----------------------------------------------------
//
// header: origin,horizon,node,variable,base,reconciled

void write_reconciled_csv(std::ostream& out, long origin, const Eigen::MatrixXd& base, const Eigen::MatrixXd& rec,
                          const std::vector<std::string>& nodes, const std::vector<std::string>& vars);

// --- scenario spec ---------------------------------------------------------

// {"scenario_id": 5, "variables": ["v1","v2"], "V": [[1,0.7],[0.7,1]],
//  "Sigma": [[...]], "Phi": [[...]], "period": 4, "T": 108, "H": 12,
//  "alpha_range": [0,4], "replications": 1000, "seed": 42, "burn_in": 200,
//  "hierarchy": {"nodes": [...]}}
// Keys other than the matrices are optional and default to the built-in values.

std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(std::string_view text);
ScenarioSpec read_scenario_file(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string spec_hash(const ScenarioSpec& spec);
std::string fnv1a_hex(std::string_view bytes);

}  // namespace mvrec::io
