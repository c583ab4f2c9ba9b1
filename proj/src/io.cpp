#include "mvrec/io.hpp"

#include "mvrec/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace mvrec::io {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        if (s == "NA" || s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
        return std::nullopt;
    }
    return v;
}

std::optional<long> parse_long(std::string_view s) {
    s = trim(s);
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    return out;
}

std::string read_all(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError("invalid " + what + " JSON: " + e.what());
    }
}

// Reads a CSV with a required header; returns rows of fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected_header, const std::string& what) {
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            if (!expected_header.empty() && table.header != expected_header) {
                std::string want;
                for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
                throw ValidationError(what + ": header must be '" + want + "'");
            }
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ValidationError(what + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty()) throw ValidationError(what + ": empty file");
    return table;
}

double require_double(const std::string& field, const std::string& what, std::size_t line) {
    auto v = parse_double(field);
    if (!v) throw ValidationError(what + ": line " + std::to_string(line) + ": bad number '" + field + "'");
    return *v;
}

std::vector<std::string> ordered_times(const std::set<std::pair<long, std::string>>& keyed) {
    std::vector<std::string> out;
    for (const auto& [key, label] : keyed) {
        if (!out.empty() && parse_time_label(out.back()) == key) {
            throw ValidationError("time labels '" + out.back() + "' and '" + label + "' denote the same period");
        }
        out.push_back(label);
    }
    return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty()) throw ValidationError("scenario '" + name + "' must be a non-empty matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ValidationError("scenario '" + name + "' rows must have equal length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

json hierarchy_json(const NodeTree& tree) {
    json nodes = json::array();
    for (const auto& id : tree.nodes) {
        json entry{{"id", id}};
        if (auto it = tree.parent.find(id); it != tree.parent.end()) entry["parent"] = it->second;
        if (auto it = tree.labels.find(id); it != tree.labels.end()) entry["label"] = it->second;
        nodes.push_back(entry);
    }
    return json{{"nodes", nodes}};
}

NodeTree hierarchy_from(const json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ValidationError("hierarchy file needs a \"nodes\" array");
    }
    std::vector<std::pair<std::string, std::optional<std::string>>> edges;
    std::map<std::string, std::string> labels;
    for (const auto& entry : doc["nodes"]) {
        if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
            throw ValidationError("every hierarchy node needs a string \"id\"");
        }
        const auto id = entry["id"].get<std::string>();
        std::optional<std::string> parent;
        if (entry.contains("parent") && !entry["parent"].is_null()) parent = entry["parent"].get<std::string>();
        if (entry.contains("label")) labels[id] = entry["label"].get<std::string>();
        edges.emplace_back(id, parent);
    }
    auto tree = NodeTree::from_edges(edges);
    tree.labels = std::move(labels);
    (void)build_hierarchy(tree);
    return tree;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

std::string format_optional(const std::optional<double>& v, int precision) {
    if (!v || !std::isfinite(*v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
    std::string s(buf);
    // "-0.000" would differ byte-wise from "0.000" for the same rounded value.
    bool all_zero = true;
    for (char c : s) {
        if (c != '-' && c != '0' && c != '.') all_zero = false;
    }
    if (all_zero && !s.empty() && s[0] == '-') s.erase(0, 1);
    return s;
}

// --- hierarchy ---------------------------------------------------------------

NodeTree hierarchy_from_json(std::string_view text) { return hierarchy_from(parse_json(text, "hierarchy")); }

std::string hierarchy_to_json(const NodeTree& tree) { return hierarchy_json(tree).dump(2); }

NodeTree read_hierarchy_file(const std::filesystem::path& path) { return hierarchy_from_json(read_all(path)); }

void write_hierarchy_file(const std::filesystem::path& path, const NodeTree& tree) {
    auto out = open_out(path);
    out << hierarchy_to_json(tree) << '\n';
}

// --- panel -------------------------------------------------------------------

long parse_time_label(std::string_view label) {
    label = trim(label);
    if (auto v = parse_long(label)) return *v;
    if (label.size() == 7 && label[4] == '-') {
        auto year = parse_long(label.substr(0, 4));
        auto month = parse_long(label.substr(5, 2));
        if (year && month && *month >= 1 && *month <= 12) return *year * 12 + (*month - 1);
    }
    throw ValidationError("bad time label '" + std::string(label) + "' (expected integer or YYYY-MM)");
}

MultiPanel read_panel_csv(std::istream& in, const Hierarchy& h) {
    const auto table = read_csv(in, {"time", "node", "variable", "value"}, "panel CSV");

    std::set<std::pair<long, std::string>> times;
    std::vector<std::string> vars;
    std::set<std::string> panel_nodes;
    bool iso = false;
    for (const auto& row : table.rows) {
        times.emplace(parse_time_label(row[0]), row[0]);
        iso = iso || row[0].find('-') != std::string::npos;
        panel_nodes.insert(row[1]);
        if (std::find(vars.begin(), vars.end(), row[2]) == vars.end()) vars.push_back(row[2]);
    }
    if (table.rows.empty()) throw ValidationError("panel CSV has no data rows");

    std::string unknown;
    std::string missing;
    for (const auto& node : panel_nodes) {
        if (!h.contains(node)) unknown += (unknown.empty() ? "" : ", ") + node;
    }
    for (const auto& node : h.nodes()) {
        if (!panel_nodes.count(node)) missing += (missing.empty() ? "" : ", ") + node;
    }
    if (!unknown.empty() || !missing.empty()) {
        std::string msg = "panel/hierarchy node mismatch";
        if (!unknown.empty()) msg += "; not in hierarchy: " + unknown;
        if (!missing.empty()) msg += "; missing from panel: " + missing;
        throw ValidationError(msg);
    }

    MultiPanel panel;
    panel.time_labels = ordered_times(times);
    std::map<std::string, std::size_t> time_index;
    for (std::size_t t = 0; t < panel.time_labels.size(); ++t) time_index[panel.time_labels[t]] = t;

    const auto n = h.n();
    const auto T = static_cast<Eigen::Index>(panel.time_labels.size());
    panel.data = Eigen::MatrixXd::Constant(T, static_cast<Eigen::Index>(n * vars.size()),
                                           std::numeric_limits<double>::quiet_NaN());
    std::vector<bool> seen(static_cast<std::size_t>(panel.data.size()), false);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto t = static_cast<Eigen::Index>(time_index.at(row[0]));
        const auto j = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), row[2]) - vars.begin());
        const auto c = static_cast<Eigen::Index>(vec_index(h.index_of(row[1]), j, n));
        const auto flat = static_cast<std::size_t>(c * T + t);
        if (seen[flat]) {
            throw ValidationError("duplicate panel cell (time=" + row[0] + ", node=" + row[1] + ", variable=" + row[2] +
                                  ")");
        }
        seen[flat] = true;
        const double v = require_double(row[3], "panel CSV", table.line_numbers[r]);
        if (!std::isfinite(v)) {
            throw ValidationError("non-finite panel value at (time=" + row[0] + ", node=" + row[1] +
                                  ", variable=" + row[2] + ")");
        }
        panel.data(t, c) = v;
    }
    for (Eigen::Index t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < vars.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                if (std::isnan(panel.data(t, static_cast<Eigen::Index>(vec_index(i, j, n))))) {
                    throw ValidationError("missing panel cell (time=" + panel.time_labels[static_cast<std::size_t>(t)] +
                                          ", node=" + h.nodes()[i] + ", variable=" + vars[j] + ")");
                }
            }
        }
    }
    panel.node_order = h.nodes();
    panel.var_order = vars;
    panel.t0 = parse_time_label(panel.time_labels.front());
    panel.frequency = iso ? "monthly" : "index";
    return panel;
}

MultiPanel read_panel_csv(const std::filesystem::path& path, const Hierarchy& h) {
    auto in = open_in(path);
    return read_panel_csv(in, h);
}

void write_panel_csv(std::ostream& out, const MultiPanel& panel) {
    out << "time,node,variable,value\n";
    const auto n = panel.n();
    for (std::size_t t = 0; t < panel.length(); ++t) {
        const std::string time =
            panel.time_labels.empty() ? std::to_string(panel.t0 + static_cast<long>(t)) : panel.time_labels[t];
        for (std::size_t j = 0; j < panel.m(); ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                out << time << ',' << panel.node_order[i] << ',' << panel.var_order[j] << ','
                    << format_double(panel.at(t, i, j)) << '\n';
            }
        }
    }
}

// --- residuals ---------------------------------------------------------------

ResidualPanel read_residual_csv(std::istream& in) {
    const auto table = read_csv(in, {}, "residual CSV");
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_double(table.rows[r][c]).value_or(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return ResidualPanel::from_rows(raw, table.header);
}

void write_residual_csv(std::ostream& out, const ResidualPanel& r) {
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
        out << (c ? "," : "") << (r.labels.empty() ? "c" + std::to_string(c) : r.labels[static_cast<std::size_t>(c)]);
    }
    out << '\n';
    for (Eigen::Index t = 0; t < r.rows(); ++t) {
        for (Eigen::Index c = 0; c < r.cols(); ++c) out << (c ? "," : "") << format_double(r.values(t, c));
        out << '\n';
    }
}

// --- bundle ------------------------------------------------------------------

LoadedBundle read_bundle(const std::filesystem::path& manifest, const Hierarchy& h) {
    const auto doc = parse_json(read_all(manifest), "bundle manifest");
    const auto base_dir = manifest.parent_path();
    if (!doc.contains("forecasts") || !doc.contains("residuals")) {
        throw ValidationError("bundle manifest needs \"forecasts\" and \"residuals\" entries");
    }
    LoadedBundle out;
    out.bundle.provenance = doc.value("provenance", "");

    auto fin = open_in(base_dir / doc["forecasts"].get<std::string>());
    const auto fc = read_csv(fin, {"origin", "horizon", "node", "variable", "value"}, "bundle forecasts");
    if (doc.contains("variables")) out.variables = doc["variables"].get<std::vector<std::string>>();
    for (const auto& row : fc.rows) {
        if (std::find(out.variables.begin(), out.variables.end(), row[3]) == out.variables.end()) {
            if (doc.contains("variables")) throw ValidationError("bundle forecasts use undeclared variable '" + row[3] + "'");
            out.variables.push_back(row[3]);
        }
    }
    const std::size_t n = h.n();
    const std::size_t m = out.variables.size();
    auto var_index = [&](const std::string& v) {
        return static_cast<std::size_t>(std::find(out.variables.begin(), out.variables.end(), v) - out.variables.begin());
    };

    std::optional<long> origin;
    long max_h = 0;
    for (std::size_t r = 0; r < fc.rows.size(); ++r) {
        auto o = parse_long(fc.rows[r][0]);
        auto hh = parse_long(fc.rows[r][1]);
        if (!o || !hh || *hh < 1) {
            throw ValidationError("bundle forecasts: line " + std::to_string(fc.line_numbers[r]) + ": bad origin/horizon");
        }
        if (origin && *origin != *o) throw ValidationError("bundle forecasts must share a single origin");
        origin = *o;
        max_h = std::max(max_h, *hh);
    }
    if (!origin) throw ValidationError("bundle forecasts are empty");
    out.bundle.origin = *origin;

    const auto nm = static_cast<Eigen::Index>(n * m);
    Eigen::MatrixXd yhat = Eigen::MatrixXd::Constant(max_h, nm, std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < fc.rows.size(); ++r) {
        const auto& row = fc.rows[r];
        if (!h.contains(row[2])) throw ValidationError("bundle forecasts: unknown node '" + row[2] + "'");
        const auto hh = *parse_long(row[1]) - 1;
        const auto c = static_cast<Eigen::Index>(vec_index(h.index_of(row[2]), var_index(row[3]), n));
        yhat(hh, c) = parse_double(row[4]).value_or(std::numeric_limits<double>::quiet_NaN());
    }
    for (Eigen::Index hh = 0; hh < yhat.rows(); ++hh) {
        for (Eigen::Index c = 0; c < nm; ++c) {
            if (std::isinf(yhat(hh, c))) {
                throw ValidationError("bundle forecasts: missing cell (h=" + std::to_string(hh + 1) + ", node=" +
                                      h.nodes()[static_cast<std::size_t>(c) % n] + ", variable=" +
                                      out.variables[static_cast<std::size_t>(c) / n] + ")");
            }
        }
    }
    out.bundle.yhat = std::move(yhat);

    auto rin = open_in(base_dir / doc["residuals"].get<std::string>());
    const auto rs = read_csv(rin, {"time", "node", "variable", "value"}, "bundle residuals");
    std::set<std::pair<long, std::string>> times;
    for (const auto& row : rs.rows) times.emplace(parse_time_label(row[0]), row[0]);
    const auto labels = ordered_times(times);
    std::map<std::string, Eigen::Index> t_index;
    for (std::size_t t = 0; t < labels.size(); ++t) t_index[labels[t]] = static_cast<Eigen::Index>(t);
    Eigen::MatrixXd raw = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(labels.size()), nm,
                                                    std::numeric_limits<double>::quiet_NaN());
    for (const auto& row : rs.rows) {
        if (!h.contains(row[1])) throw ValidationError("bundle residuals: unknown node '" + row[1] + "'");
        const auto j = var_index(row[2]);
        if (j >= m) throw ValidationError("bundle residuals: unknown variable '" + row[2] + "'");
        raw(t_index.at(row[0]), static_cast<Eigen::Index>(vec_index(h.index_of(row[1]), j, n))) =
            parse_double(row[3]).value_or(std::numeric_limits<double>::quiet_NaN());
    }
    out.bundle.residuals = ResidualPanel::from_rows(raw, vec_labels(h.nodes(), out.variables));
    return out;
}

void write_bundle(const std::filesystem::path& dir, const ExternalForecastBundle& bundle, const Hierarchy& h,
                  const std::vector<std::string>& variables) {
    std::filesystem::create_directories(dir);
    const std::size_t n = h.n();
    {
        auto out = open_out(dir / "forecasts.csv");
        out << "origin,horizon,node,variable,value\n";
        for (Eigen::Index hh = 0; hh < bundle.yhat.rows(); ++hh) {
            for (std::size_t j = 0; j < variables.size(); ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    out << bundle.origin << ',' << hh + 1 << ',' << h.nodes()[i] << ',' << variables[j] << ','
                        << format_double(bundle.yhat(hh, static_cast<Eigen::Index>(vec_index(i, j, n)))) << '\n';
                }
            }
        }
    }
    {
        auto out = open_out(dir / "residuals.csv");
        out << "time,node,variable,value\n";
        for (Eigen::Index t = 0; t < bundle.residuals.rows(); ++t) {
            for (std::size_t j = 0; j < variables.size(); ++j) {
                for (std::size_t i = 0; i < n; ++i) {
                    out << t + 1 << ',' << h.nodes()[i] << ',' << variables[j] << ','
                        << format_double(bundle.residuals.values(t, static_cast<Eigen::Index>(vec_index(i, j, n))))
                        << '\n';
                }
            }
        }
    }
    auto out = open_out(dir / "manifest.json");
    out << json{{"forecasts", "forecasts.csv"},
                {"residuals", "residuals.csv"},
                {"provenance", bundle.provenance},
                {"variables", variables}}
               .dump(2)
        << '\n';
}

// --- reconciled --------------------------------------------------------------

void write_reconciled_csv(std::ostream& out, long origin, const Eigen::MatrixXd& base, const Eigen::MatrixXd& rec,
                          const std::vector<std::string>& nodes, const std::vector<std::string>& vars) {
    out << "origin,horizon,node,variable,base,reconciled\n";
    const std::size_t n = nodes.size();
    for (Eigen::Index hh = 0; hh < base.rows(); ++hh) {
        for (std::size_t j = 0; j < vars.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto c = static_cast<Eigen::Index>(vec_index(i, j, n));
                out << origin << ',' << hh + 1 << ',' << nodes[i] << ',' << vars[j] << ','
                    << format_double(base(hh, c)) << ',' << format_double(rec(hh, c)) << '\n';
            }
        }
    }
}

// --- scenario ----------------------------------------------------------------

std::string scenario_to_json(const ScenarioSpec& spec) {
    json doc{{"scenario_id", spec.scenario_id},
             {"variables", spec.variables},
             {"V", matrix_to_json(spec.V)},
             {"Sigma", matrix_to_json(spec.Sigma)},
             {"Phi", matrix_to_json(spec.Phi)},
             {"period", spec.period},
             {"T", spec.T},
             {"H", spec.H},
             {"alpha_range", {spec.alpha_low, spec.alpha_high}},
             {"replications", spec.replications},
             {"seed", spec.seed},
             {"burn_in", spec.burn_in},
             {"hierarchy", hierarchy_json(spec.tree)}};
    return doc.dump(2);
}

ScenarioSpec scenario_from_json(std::string_view text) {
    const auto doc = parse_json(text, "scenario");
    if (!doc.is_object()) throw ValidationError("scenario JSON must be an object");
    ScenarioSpec spec;
    try {
        const int id = doc.value("scenario_id", 0);
        if (id != 0) spec = builtin_scenario(id);
        if (doc.contains("hierarchy")) spec.tree = hierarchy_from(doc["hierarchy"]);
        if (doc.contains("variables")) spec.variables = doc["variables"].get<std::vector<std::string>>();
        if (doc.contains("V")) spec.V = matrix_from_json(doc["V"], "V");
        if (doc.contains("Sigma")) spec.Sigma = matrix_from_json(doc["Sigma"], "Sigma");
        if (doc.contains("Phi")) spec.Phi = matrix_from_json(doc["Phi"], "Phi");
        spec.period = doc.value("period", spec.period);
        spec.T = doc.value("T", spec.T);
        spec.H = doc.value("H", spec.H);
        if (doc.contains("alpha_range")) {
            const auto& range = doc["alpha_range"];
            if (!range.is_array() || range.size() != 2) throw ValidationError("alpha_range must be [low, high]");
            spec.alpha_low = range[0].get<double>();
            spec.alpha_high = range[1].get<double>();
        }
        spec.replications = doc.value("replications", spec.replications);
        spec.seed = doc.value("seed", spec.seed);
        spec.burn_in = doc.value("burn_in", spec.burn_in);
        spec.scenario_id = id;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid scenario JSON: ") + e.what());
    }
    if (spec.V.size() == 0 || spec.Sigma.size() == 0 || spec.Phi.size() == 0) {
        throw ValidationError("custom scenario needs V, Sigma and Phi");
    }
    spec.validate();
    return spec;
}

ScenarioSpec read_scenario_file(const std::filesystem::path& path) { return scenario_from_json(read_all(path)); }

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string spec_hash(const ScenarioSpec& spec) { return fnv1a_hex(scenario_to_json(spec)); }

}  // namespace mvrec::io
