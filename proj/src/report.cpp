#include "mvrec/report.hpp"

#include "mvrec/error.hpp"
#include "mvrec/io.hpp"

#include <fstream>
#include <sstream>

namespace mvrec::report {

namespace {

using io::format_optional;

std::string csv(const std::optional<double>& v) { return format_optional(v, kCsvDecimals); }

std::string md(const std::optional<double>& v) {
    const auto s = format_optional(v, 4);
    return s.empty() ? "n/a" : s;
}

const char* flag(bool b) { return b ? "true" : "false"; }

bool negative(const std::optional<double>& v) { return v && *v < 0.0; }

struct NamedTable {
    std::string model;
    std::string estimator;
    MetricTable table;
    MetricSummary summary;
};

void append_markdown_means(std::ostringstream& out, const std::string& title, const std::vector<NamedTable>& tables,
                           std::size_t horizons) {
    out << "## " << title << "\n\n| model | estimator |";
    for (std::size_t h = 1; h <= horizons; ++h) out << " h=" << h << " |";
    out << " % >= 0 |\n|---|---|";
    for (std::size_t h = 0; h <= horizons; ++h) out << "---|";
    out << '\n';
    for (const auto& t : tables) {
        out << "| " << t.model << " | " << t.estimator << " |";
        for (const auto& v : t.summary.mean_per_h) out << ' ' << md(v) << (negative(v) ? " (neg)" : "") << " |";
        out << ' ' << md(t.summary.pct_nonnegative) << " |\n";
    }
    out << '\n';
}

}  // namespace

MetricTable relrmse_base(const ErrorCube& cube, const std::string& estimator) {
    auto t = rel_rmse(cube, "multi:" + estimator, "base");
    t.kind = "relrmse_base";
    return t;
}

MetricTable relrmse_uni(const ErrorCube& cube, const std::string& estimator) {
    auto t = rel_rmse(cube, "multi:" + estimator, "uni:" + estimator);
    t.kind = "relrmse_uni";
    return t;
}

std::vector<std::string> estimators_in(const ErrorCube& cube) {
    std::vector<std::string> out;
    for (const auto& method : cube.methods()) {
        if (method.rfind("multi:", 0) == 0) out.push_back(method.substr(6));
    }
    return out;
}

Files study_files(const StudyResult& result) {
    const std::string scenario = result.spec.scenario_id > 0 ? std::to_string(result.spec.scenario_id) : "custom";
    std::vector<NamedTable> base_tables;
    std::vector<NamedTable> uni_tables;
    for (const auto& [model, cube] : result.cubes) {
        for (const auto& est : estimators_in(cube)) {
            auto b = relrmse_base(cube, est);
            auto u = relrmse_uni(cube, est);
            auto bs = summarize(b);
            auto us = summarize(u);
            base_tables.push_back({model, est, std::move(b), std::move(bs)});
            uni_tables.push_back({model, est, std::move(u), std::move(us)});
        }
    }

    Files files;
    auto means = [&](const std::vector<NamedTable>& tables) {
        std::ostringstream out;
        out << "scenario,model,estimator,horizon,mean_relrmse,negative\n";
        for (const auto& t : tables) {
            for (std::size_t h = 0; h < t.summary.mean_per_h.size(); ++h) {
                const auto& v = t.summary.mean_per_h[h];
                out << scenario << ',' << t.model << ',' << t.estimator << ',' << h + 1 << ',' << csv(v) << ','
                    << flag(negative(v)) << '\n';
            }
        }
        return out.str();
    };
    auto pct = [&](const std::vector<NamedTable>& tables) {
        std::ostringstream out;
        out << "scenario,model,estimator,pct_nonnegative,defined_cells\n";
        for (const auto& t : tables) {
            out << scenario << ',' << t.model << ',' << t.estimator << ',' << csv(t.summary.pct_nonnegative) << ','
                << t.summary.defined_cells << '\n';
        }
        return out.str();
    };
    files["summary_relrmse_base.csv"] = means(base_tables);
    files["summary_relrmse_uni.csv"] = means(uni_tables);
    files["summary_pct_nonneg_base.csv"] = pct(base_tables);
    files["summary_pct_nonneg_uni.csv"] = pct(uni_tables);

    {
        std::ostringstream out;
        out << "scenario,model,estimator,kind,node,variable,horizon,relrmse,negative\n";
        for (const auto* group : {&base_tables, &uni_tables}) {
            const char* kind = group == &base_tables ? "base" : "uni";
            for (const auto& t : *group) {
                for (std::size_t h = 0; h < t.table.horizons; ++h) {
                    for (std::size_t j = 0; j < t.table.vars.size(); ++j) {
                        for (std::size_t i = 0; i < t.table.nodes.size(); ++i) {
                            const auto& v = t.table.at(i, j, h);
                            out << scenario << ',' << t.model << ',' << t.estimator << ',' << kind << ','
                                << t.table.nodes[i] << ',' << t.table.vars[j] << ',' << h + 1 << ',' << csv(v) << ','
                                << flag(negative(v)) << '\n';
                        }
                    }
                }
            }
        }
        files["relrmse_series.csv"] = out.str();
    }

    struct RmsseRow {
        std::string model;
        std::string method;
        std::vector<std::optional<double>> values;
    };
    std::vector<RmsseRow> rmsse_rows;
    for (const auto& [model, cube] : result.cubes) {
        if (cube.slices() == 0 || cube.scales().rows() == 0) continue;
        for (const auto& method : cube.methods()) rmsse_rows.push_back({model, method, mean_rmsse(cube, method)});
    }
    {
        std::vector<std::vector<std::optional<double>>> candidates;
        for (const auto& r : rmsse_rows) candidates.push_back(r.values);
        const auto best = best_per_horizon(candidates);
        std::ostringstream out;
        out << "scenario,model,method,horizon,mean_rmsse,best\n";
        for (std::size_t k = 0; k < rmsse_rows.size(); ++k) {
            for (std::size_t h = 0; h < rmsse_rows[k].values.size(); ++h) {
                out << scenario << ',' << rmsse_rows[k].model << ',' << rmsse_rows[k].method << ',' << h + 1 << ','
                    << csv(rmsse_rows[k].values[h]) << ',' << flag(best[h] && *best[h] == k) << '\n';
            }
        }
        files["summary_rmsse.csv"] = out.str();
    }

    {
        const auto horizons = static_cast<std::size_t>(result.spec.H);
        std::ostringstream out;
        out << "# Simulation study, scenario " << scenario << "\n\n"
            << "Replicates completed: " << result.completed << " of " << result.spec.replications
            << ". Seed: " << result.spec.seed << ".\n\n";
        append_markdown_means(out, "Mean RelRMSE (multivariate vs base)", base_tables, horizons);
        append_markdown_means(out, "Mean RelRMSE (multivariate vs univariate)", uni_tables, horizons);
        if (!rmsse_rows.empty()) {
            out << "## Mean RMSSE\n\n| model | method |";
            for (std::size_t h = 1; h <= horizons; ++h) out << " h=" << h << " |";
            out << "\n|---|---|";
            for (std::size_t h = 0; h < horizons; ++h) out << "---|";
            out << '\n';
            for (const auto& r : rmsse_rows) {
                out << "| " << r.model << " | " << r.method << " |";
                for (const auto& v : r.values) out << ' ' << md(v) << " |";
                out << '\n';
            }
            out << '\n';
        }
        files["summary.md"] = out.str();
    }
    return files;
}

Files error_files(const StudyResult& result) {
    Files files;
    for (const auto& [model, cube] : result.cubes) {
        for (const auto& method : cube.methods()) {
            std::string tag = model + "_" + method;
            for (auto& c : tag) {
                if (c == ':') c = '-';
            }
            const auto& sq = cube.sq_errors(method);
            std::ostringstream out;
            out << "replicate";
            for (std::size_t h = 0; h < cube.horizons(); ++h) {
                for (std::size_t j = 0; j < cube.m(); ++j) {
                    for (std::size_t i = 0; i < cube.n(); ++i) {
                        out << ",h" << h + 1 << ':' << cube.nodes()[i] << ':' << cube.vars()[j];
                    }
                }
            }
            out << '\n';
            for (Eigen::Index k = 0; k < sq.rows(); ++k) {
                out << cube.slice_ids()[static_cast<std::size_t>(k)];
                for (Eigen::Index c = 0; c < sq.cols(); ++c) out << ',' << io::format_double(sq(k, c));
                out << '\n';
            }
            files["errors_" + tag + ".csv"] = out.str();
        }
    }
    return files;
}

Files evaluate_files(const std::map<std::string, CvResult>& by_model) {
    std::vector<NamedTable> base_tables;
    std::vector<NamedTable> uni_tables;
    for (const auto& [model, cv] : by_model) {
        for (const auto& est : estimators_in(cv.cube)) {
            auto b = relrmse_base(cv.cube, est);
            auto u = relrmse_uni(cv.cube, est);
            auto bs = summarize(b);
            auto us = summarize(u);
            base_tables.push_back({model, est, std::move(b), std::move(bs)});
            uni_tables.push_back({model, est, std::move(u), std::move(us)});
        }
    }

    Files files;
    auto per_series = [](const std::vector<NamedTable>& tables) {
        std::ostringstream out;
        out << "model,estimator,variable,series,horizon,relrmse,negative\n";
        for (const auto& t : tables) {
            for (std::size_t j = 0; j < t.table.vars.size(); ++j) {
                for (std::size_t i = 0; i < t.table.nodes.size(); ++i) {
                    for (std::size_t h = 0; h < t.table.horizons; ++h) {
                        const auto& v = t.table.at(i, j, h);
                        out << t.model << ',' << t.estimator << ',' << t.table.vars[j] << ',' << t.table.nodes[i]
                            << ',' << h + 1 << ',' << csv(v) << ',' << flag(negative(v)) << '\n';
                    }
                }
            }
        }
        return out.str();
    };
    files["relrmse_base.csv"] = per_series(base_tables);
    files["relrmse_uni.csv"] = per_series(uni_tables);

    {
        std::ostringstream out;
        out << "model,estimator,kind,horizon,mean_relrmse,pct_nonnegative\n";
        for (const auto* group : {&base_tables, &uni_tables}) {
            const char* kind = group == &base_tables ? "base" : "uni";
            for (const auto& t : *group) {
                for (std::size_t h = 0; h < t.summary.mean_per_h.size(); ++h) {
                    out << t.model << ',' << t.estimator << ',' << kind << ',' << h + 1 << ','
                        << csv(t.summary.mean_per_h[h]) << ',' << csv(t.summary.pct_nonnegative) << '\n';
                }
            }
        }
        files["summary_evaluate.csv"] = out.str();
    }

    {
        std::ostringstream out;
        out << "# Rolling-origin evaluation\n\n";
        for (const auto* group : {&base_tables, &uni_tables}) {
            const char* title = group == &base_tables ? "RelRMSE (multivariate vs base)"
                                                      : "RelRMSE (multivariate vs univariate)";
            for (const auto& t : *group) {
                out << "## " << title << ", " << t.model << ", " << t.estimator << "\n\n| variable | series |";
                for (std::size_t h = 1; h <= t.table.horizons; ++h) out << " h=" << h << " |";
                out << "\n|---|---|";
                for (std::size_t h = 0; h < t.table.horizons; ++h) out << "---|";
                out << '\n';
                for (std::size_t j = 0; j < t.table.vars.size(); ++j) {
                    for (std::size_t i = 0; i < t.table.nodes.size(); ++i) {
                        out << "| " << t.table.vars[j] << " | " << t.table.nodes[i] << " |";
                        for (std::size_t h = 0; h < t.table.horizons; ++h) {
                            const auto& v = t.table.at(i, j, h);
                            out << ' ' << md(v) << (negative(v) ? " (neg)" : "") << " |";
                        }
                        out << '\n';
                    }
                }
                out << '\n';
            }
        }
        files["evaluate.md"] = out.str();
    }
    return files;
}

void write_files(const std::filesystem::path& dir, const Files& files) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : files) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw ValidationError("cannot write '" + (dir / name).string() + "'");
        out << text;
    }
}

}  // namespace mvrec::report
