#include "mvrec/cli.hpp"

#include "mvrec/error.hpp"
#include "mvrec/io.hpp"
#include "mvrec/report.hpp"
#include "mvrec/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#ifndef MVREC_VERSION
#define MVREC_VERSION "0.0.0"
#endif

namespace mvrec::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Anything raised while reading the configuration is a user error (exit 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class F>
auto config_step(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

struct Options {
    std::string hierarchy;
    std::string panel;
    std::string bundle;
    std::optional<int> scenario;
    std::string spec;
    std::optional<int> reps;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::vector<std::string> forecasters;
    std::vector<std::string> estimators;
    std::string method = "proj-m";
    std::optional<int> horizons;
    std::optional<int> origins;
    std::string first_origin;
    std::optional<int> period;
    std::string out;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << text;
}

void prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
}

ScenarioSpec load_scenario(const Options& o) {
    return config_step([&] {
        if (o.scenario && !o.spec.empty()) throw ArgumentError("--scenario and --spec are mutually exclusive");
        ScenarioSpec spec;
        if (!o.spec.empty()) {
            spec = io::read_scenario_file(o.spec);
        } else if (o.scenario) {
            spec = builtin_scenario(*o.scenario);
        } else {
            throw ArgumentError("one of --scenario or --spec is required");
        }
        if (o.reps) {
            if (*o.reps < 1) throw ArgumentError("--reps must be at least 1");
            spec.replications = *o.reps;
        }
        if (o.seed) spec.seed = *o.seed;
        if (o.horizons) spec.H = *o.horizons;
        spec.validate();
        return spec;
    });
}

std::vector<ForecasterSpec> parse_forecasters(const std::vector<std::string>& names, int period) {
    return config_step([&] {
        std::vector<ForecasterSpec> out;
        for (const auto& name : names.empty() ? std::vector<std::string>{"arx"} : names) {
            out.push_back(ForecasterSpec::parse(name, period));
        }
        return out;
    });
}

std::vector<CovarianceKind> parse_estimators(const std::vector<std::string>& names) {
    return config_step([&] {
        std::vector<CovarianceKind> out;
        for (const auto& name : names.empty() ? std::vector<std::string>{"shrinkage"} : names) {
            out.push_back(parse_covariance_kind(name));
        }
        return out;
    });
}

Method parse_method_option(const std::string& name) {
    return config_step([&] { return parse_method(name); });
}

int panel_period(const Options& o, const MultiPanel& panel) {
    if (o.period) {
        if (*o.period < 1) throw ConfigError("--period must be positive");
        return *o.period;
    }
    return panel.frequency == "monthly" ? 12 : 4;
}

int cmd_simulate_study(const Options& o, std::ostream& out, std::ostream& err) {
    const auto spec = load_scenario(o);
    StudyOptions options;
    options.forecasters = parse_forecasters(o.forecasters, spec.period);
    options.estimators = parse_estimators(o.estimators);
    options.method = parse_method_option(o.method);
    options.threads = o.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : o.threads;
    config_step([&] {
        for (const auto& fc : options.forecasters) {
            if (static_cast<std::size_t>(spec.T) < fc.min_train_length()) {
                throw ArgumentError(fc.name() + " needs T >= " + std::to_string(fc.min_train_length()));
            }
        }
        return 0;
    });
    prepare_out(o.out);

    const auto result = run_study(spec, options);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    for (const auto& f : result.failures) err << "warning: replicate " << f.replicate << " failed: " << f.message << '\n';

    report::write_files(o.out, report::study_files(result));
    report::write_files(o.out, report::error_files(result));

    std::vector<std::string> fc_names;
    for (const auto& fc : options.forecasters) fc_names.push_back(fc.name());
    std::vector<std::string> est_names;
    for (const auto k : options.estimators) est_names.emplace_back(to_string(k));
    json failures = json::array();
    for (const auto& f : result.failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
    const json manifest{{"command", "simulate-study"},
                        {"version", MVREC_VERSION},
                        {"spec_hash", io::spec_hash(spec)},
                        {"seed", spec.seed},
                        {"replications", spec.replications},
                        {"completed", result.completed},
                        {"failures", failures},
                        {"forecasters", fc_names},
                        {"estimators", est_names},
                        {"method", std::string(to_string(options.method))},
                        {"scenario", json::parse(io::scenario_to_json(spec))}};
    write_text(fs::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
    write_text(fs::path(o.out) / "scenario.json", io::scenario_to_json(spec) + "\n");
    out << "completed " << result.completed << " of " << spec.replications << " replicates; wrote " << o.out << '\n';
    return kExitOk;
}

Hierarchy load_hierarchy(const Options& o) {
    return config_step([&] {
        if (o.hierarchy.empty()) throw ArgumentError("--hierarchy is required");
        return build_hierarchy(io::read_hierarchy_file(o.hierarchy));
    });
}

int cmd_reconcile(const Options& o, std::ostream& out, std::ostream&) {
    const auto h = load_hierarchy(o);
    if (o.panel.empty() == o.bundle.empty()) throw ConfigError("exactly one of --panel or --bundle is required");
    if (o.estimators.size() > 1) throw ConfigError("reconcile takes a single --estimator");
    const auto kind = parse_estimators(o.estimators).front();
    const auto method = parse_method_option(o.method);

    BaseForecastSet base;
    std::vector<std::string> vars;
    std::string provenance;
    long origin = 0;
    if (!o.panel.empty()) {
        const auto panel = config_step([&] { return io::read_panel_csv(fs::path(o.panel), h); });
        if (o.forecasters.size() > 1) throw ConfigError("reconcile takes a single --forecaster");
        const auto fc = parse_forecasters(o.forecasters, panel_period(o, panel)).front();
        const int horizons = o.horizons.value_or(12);
        if (horizons < 1) throw ConfigError("--horizons must be at least 1");
        config_step([&] {
            if (panel.length() < fc.min_train_length()) {
                throw InsufficientDataError(fc.name() + " needs at least " + std::to_string(fc.min_train_length()) +
                                            " observations, panel has " + std::to_string(panel.length()));
            }
            return 0;
        });
        base = fit_forecast(fc, panel, static_cast<std::size_t>(horizons));
        vars = panel.var_order;
        provenance = fc.name();
        origin = static_cast<long>(panel.length());
    } else {
        const auto loaded = config_step([&] {
            auto l = io::read_bundle(fs::path(o.bundle), h);
            return std::pair{l, import_external(l.bundle, h, l.variables)};
        });
        base = loaded.second;
        vars = loaded.first.variables;
        provenance = loaded.first.bundle.provenance;
        origin = loaded.first.bundle.origin;
    }
    prepare_out(o.out);

    const std::size_t m = vars.size();
    const auto n = static_cast<Eigen::Index>(h.n());
    ReconciledForecastSet rec;
    std::optional<double> lambda;
    if (method == Method::Univariate) {
        std::vector<CovarianceEstimate> blocks;
        for (std::size_t j = 0; j < m; ++j) {
            blocks.push_back(estimate_covariance(kind, base.residuals.columns(static_cast<Eigen::Index>(j) * n, n)));
        }
        rec = reconcile_per_variable(base, blocks, h);
    } else {
        const auto W = estimate_covariance(kind, base.residuals);
        lambda = W.lambda;
        rec = reconcile(method, base, W, h, m);
    }
    rec.w_kind = kind;

    {
        std::ostringstream csv;
        io::write_reconciled_csv(csv, origin, base.yhat, rec.ytilde, h.nodes(), vars);
        write_text(fs::path(o.out) / "reconciled.csv", csv.str());
    }
    double worst = 0.0;
    {
        std::ostringstream csv;
        csv << "horizon,max_violation,coherent\n";
        for (Eigen::Index hh = 0; hh < rec.ytilde.rows(); ++hh) {
            const Eigen::MatrixXd row = rec.ytilde.row(hh);
            const double v = max_constraint_violation(h, m, row);
            const bool ok = v <= 1e-8 * (1.0 + row.cwiseAbs().maxCoeff());
            worst = std::max(worst, v);
            csv << hh + 1 << ',' << io::format_double(v) << ',' << (ok ? "true" : "false") << '\n';
        }
        write_text(fs::path(o.out) / "coherence.csv", csv.str());
    }
    json manifest{{"command", "reconcile"},
                  {"version", MVREC_VERSION},
                  {"method", std::string(to_string(method))},
                  {"estimator", std::string(to_string(kind))},
                  {"base", provenance},
                  {"origin", origin},
                  {"horizons", rec.ytilde.rows()},
                  {"variables", vars},
                  {"residual_rows", base.residuals.rows()},
                  {"max_violation", worst}};
    if (lambda) manifest["shrinkage_lambda"] = *lambda;
    write_text(fs::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
    out << "reconciled " << rec.ytilde.rows() << " horizons; max constraint violation " << io::format_double(worst)
        << '\n';
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto h = load_hierarchy(o);
    if (o.panel.empty()) throw ConfigError("--panel is required");
    const auto panel = config_step([&] { return io::read_panel_csv(fs::path(o.panel), h); });
    const auto forecasters = parse_forecasters(o.forecasters, panel_period(o, panel));
    const auto estimators = parse_estimators(o.estimators);
    const auto method = parse_method_option(o.method);
    const int horizons = o.horizons.value_or(12);
    const int k = o.origins.value_or(12);
    if (horizons < 1) throw ConfigError("--horizons must be at least 1");
    if (k < 1) throw ConfigError("--origins must be at least 1");

    const long len = static_cast<long>(panel.length());
    long first = len - horizons - k + 1;
    if (!o.first_origin.empty()) {
        const long key = config_step([&] { return io::parse_time_label(o.first_origin); });
        first = -1;
        for (std::size_t t = 0; t < panel.time_labels.size(); ++t) {
            if (io::parse_time_label(panel.time_labels[t]) == key) first = static_cast<long>(t);
        }
        if (first < 0) throw ConfigError("--first-origin '" + o.first_origin + "' is not a time in the panel");
    }
    std::vector<long> origins;
    for (long i = 0; i < k; ++i) origins.push_back(first + i);
    prepare_out(o.out);

    std::map<std::string, CvResult> results;
    json skipped = json::object();
    for (const auto& fc : forecasters) {
        auto cv = rolling_origin_cv(panel, h, fc, estimators, origins, static_cast<std::size_t>(horizons), method);
        for (const auto& w : cv.warnings) err << "warning: " << fc.name() << ": " << w << '\n';
        if (cv.cube.slices() == 0) {
            throw ConfigError("no feasible origin for " + fc.name() + " (panel length " + std::to_string(len) +
                              ", needs " + std::to_string(fc.min_train_length()) + " training rows)");
        }
        skipped[fc.name()] = cv.skipped;
        results.emplace(fc.name(), std::move(cv));
    }
    report::write_files(o.out, report::evaluate_files(results));

    std::vector<std::string> est_names;
    for (const auto e : estimators) est_names.emplace_back(to_string(e));
    json origin_labels = json::array();
    for (const long t : origins) {
        if (t >= 0 && t < len && !panel.time_labels.empty()) {
            origin_labels.push_back(panel.time_labels[static_cast<std::size_t>(t)]);
        } else {
            origin_labels.push_back(t);
        }
    }
    const json manifest{{"command", "evaluate"},
                        {"version", MVREC_VERSION},
                        {"panel_rows", len},
                        {"nodes", h.n()},
                        {"variables", panel.var_order},
                        {"horizons", horizons},
                        {"origins", origins},
                        {"origin_times", origin_labels},
                        {"skipped", skipped},
                        {"estimators", est_names},
                        {"method", std::string(to_string(method))},
                        {"period", panel_period(o, panel)}};
    write_text(fs::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
    out << "evaluated " << origins.size() << " origins x " << horizons << " horizons; wrote " << o.out << '\n';
    return kExitOk;
}

int cmd_scenario_info(const Options& o, std::ostream& out) {
    const auto spec = load_scenario(o);
    const auto text = io::scenario_to_json(spec);
    if (!o.out.empty()) {
        prepare_out(o.out);
        write_text(fs::path(o.out) / "scenario.json", text + "\n");
    }
    out << text << "\nspec_hash " << io::spec_hash(spec) << "\nphi_spectral_radius "
        << io::format_double(spectral_radius(spec.Phi)) << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Multivariate hierarchical forecast reconciliation", "mvrec"};
    app.set_version_flag("--version", MVREC_VERSION);
    app.require_subcommand(1);

    auto add_scenario = [&](CLI::App* c) {
        c->add_option("--scenario", o.scenario, "Built-in scenario id (1..9)");
        c->add_option("--spec", o.spec, "Custom scenario JSON");
    };
    auto add_models = [&](CLI::App* c) {
        c->add_option("--forecaster", o.forecasters, "seasonal-mean, arx, arx:<p> or var1 (repeatable)");
        c->add_option("--estimator", o.estimators, "sample, shrinkage, identity or diagonal (repeatable)");
        c->add_option("--method", o.method, "direct, proj-j, proj-m or univariate");
    };

    auto* sim = app.add_subcommand("simulate-study", "Monte Carlo study over a scenario");
    add_scenario(sim);
    add_models(sim);
    sim->add_option("--reps", o.reps, "Replicates");
    sim->add_option("--seed", o.seed, "Experiment seed");
    sim->add_option("--threads", o.threads, "Worker threads (0 = available parallelism)");
    sim->add_option("--horizons", o.horizons, "Forecast horizon H");
    sim->add_option("--out", o.out, "Output directory")->required();

    auto* rec = app.add_subcommand("reconcile", "Reconcile base forecasts for a panel or bundle");
    rec->add_option("--hierarchy", o.hierarchy, "Hierarchy JSON")->required();
    rec->add_option("--panel", o.panel, "Long-format panel CSV");
    rec->add_option("--bundle", o.bundle, "External forecast bundle manifest");
    add_models(rec);
    rec->add_option("--horizons", o.horizons, "Forecast horizon H (panel mode)");
    rec->add_option("--period", o.period, "Seasonal period (default 12 for monthly panels, else 4)");
    rec->add_option("--out", o.out, "Output directory")->required();

    auto* ev = app.add_subcommand("evaluate", "Rolling-origin evaluation on a panel");
    ev->add_option("--hierarchy", o.hierarchy, "Hierarchy JSON")->required();
    ev->add_option("--panel", o.panel, "Long-format panel CSV")->required();
    add_models(ev);
    ev->add_option("--horizons", o.horizons, "Forecast horizon H");
    ev->add_option("--origins", o.origins, "Number of forecast origins");
    ev->add_option("--first-origin", o.first_origin, "Time of the first forecast target (default: last feasible)");
    ev->add_option("--period", o.period, "Seasonal period (default 12 for monthly panels, else 4)");
    ev->add_option("--threads", o.threads, "Accepted for symmetry; origins run sequentially");
    ev->add_option("--out", o.out, "Output directory")->required();

    auto* info = app.add_subcommand("scenario-info", "Print a scenario specification");
    add_scenario(info);
    info->add_option("--reps", o.reps, "Replicates");
    info->add_option("--seed", o.seed, "Experiment seed");
    info->add_option("--horizons", o.horizons, "Forecast horizon H");
    info->add_option("--out", o.out, "Also write scenario.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate_study(o, out, err);
        if (*rec) return cmd_reconcile(o, out, err);
        if (*ev) return cmd_evaluate(o, out, err);
        return cmd_scenario_info(o, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FactorizationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const FitError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace mvrec::cli
