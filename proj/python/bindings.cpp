#include "mvrec/baseforecast.hpp"
#include "mvrec/covariance.hpp"
#include "mvrec/error.hpp"
#include "mvrec/evaluate.hpp"
#include "mvrec/hierarchy.hpp"
#include "mvrec/io.hpp"
#include "mvrec/reconcile.hpp"
#include "mvrec/report.hpp"
#include "mvrec/simulate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace mvrec;

namespace {

Hierarchy make_hierarchy(const std::vector<std::pair<std::string, std::optional<std::string>>>& edges) {
    return build_hierarchy(NodeTree::from_edges(edges));
}

BaseForecastSet as_base(const Eigen::MatrixXd& yhat, const Eigen::MatrixXd& residuals) {
    BaseForecastSet base;
    base.yhat = yhat;
    base.residuals = ResidualPanel::from_rows(residuals, {});
    return base;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multivariate hierarchical forecast reconciliation";

    auto base_error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<StructureError>(m, "StructureError", base_error.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base_error.ptr());
    py::register_exception<ArgumentError>(m, "ArgumentError", base_error.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base_error.ptr());
    py::register_exception<FactorizationError>(m, "FactorizationError", base_error.ptr());
    py::register_exception<FitError>(m, "FitError", base_error.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base_error.ptr());

    py::class_<Hierarchy>(m, "Hierarchy")
        .def(py::init(&make_hierarchy), py::arg("edges"),
             "Build from (node, parent-or-None) pairs.")
        .def_static("from_json", [](const std::string& text) { return build_hierarchy(io::hierarchy_from_json(text)); })
        .def_property_readonly("nodes", &Hierarchy::nodes)
        .def_property_readonly("n", &Hierarchy::n)
        .def_property_readonly("n_bottom", &Hierarchy::n_bottom)
        .def_property_readonly("S", &Hierarchy::S)
        .def("index_of", &Hierarchy::index_of)
        .def("constraint_matrix", [](const Hierarchy& h) { return constraint_matrices(h).C; })
        .def("kron_extend", [](const Hierarchy& h, std::size_t mm) {
            auto k = kron_extend(h, mm);
            return py::make_tuple(k.S, k.C, k.J);
        }, py::arg("m"));

    m.def("max_constraint_violation", &max_constraint_violation, py::arg("hierarchy"), py::arg("m"), py::arg("rows"));

    m.def("sample_covariance", [](const Eigen::MatrixXd& r) {
        return sample_covariance(ResidualPanel::from_rows(r, {})).W;
    }, py::arg("residuals"));
    m.def("shrinkage_covariance", [](const Eigen::MatrixXd& r, std::optional<double> lambda) {
        auto est = shrinkage_covariance(ResidualPanel::from_rows(r, {}), lambda);
        return py::make_tuple(est.W, *est.lambda);
    }, py::arg("residuals"), py::arg("fixed_lambda") = py::none(),
       "Returns (W, lambda).");

    m.def("reconcile", [](const Hierarchy& h, std::size_t mm, const Eigen::MatrixXd& yhat, const Eigen::MatrixXd& W,
                          const std::string& method) {
        CovarianceEstimate est;
        est.W = W;
        return reconcile(parse_method(method), as_base(yhat, Eigen::MatrixXd()), est, h, mm).ytilde;
    }, py::arg("hierarchy"), py::arg("m"), py::arg("yhat"), py::arg("W"), py::arg("method") = "proj-m",
       "Reconcile H x (n*m) base forecasts (variable-major columns) with covariance W.");
    m.def("reconciliation_operator", [](const Hierarchy& h, std::size_t mm, const Eigen::MatrixXd& W,
                                        const std::string& method) {
        return Reconciler(h, mm, W, parse_method(method)).op();
    }, py::arg("hierarchy"), py::arg("m"), py::arg("W"), py::arg("method") = "proj-m");
    m.def("reconcile_per_variable", [](const Hierarchy& h, const Eigen::MatrixXd& yhat,
                                       const std::vector<Eigen::MatrixXd>& blocks) {
        std::vector<CovarianceEstimate> est;
        for (const auto& b : blocks) {
            CovarianceEstimate e;
            e.W = b;
            est.push_back(e);
        }
        return reconcile_per_variable(as_base(yhat, Eigen::MatrixXd()), est, h).ytilde;
    }, py::arg("hierarchy"), py::arg("yhat"), py::arg("W_blocks"));

    m.def("fit_forecast", [](const Hierarchy& h, const Eigen::MatrixXd& data, const std::vector<std::string>& vars,
                             const std::string& forecaster, int period, std::size_t horizons) {
        MultiPanel p;
        p.data = data;
        p.node_order = h.nodes();
        p.var_order = vars;
        auto base = fit_forecast(ForecasterSpec::parse(forecaster, period), p, horizons);
        return py::make_tuple(base.yhat, base.residuals.values);
    }, py::arg("hierarchy"), py::arg("data"), py::arg("variables"), py::arg("forecaster") = "arx",
       py::arg("period") = 4, py::arg("horizons") = 12, "Returns (yhat, residuals).");

    m.def("simulate_replicate", [](int scenario, std::uint64_t seed, std::uint64_t index) {
        auto spec = builtin_scenario(scenario);
        spec.seed = seed;
        return simulate_replicate(spec, index).panel.data;
    }, py::arg("scenario"), py::arg("seed") = 0, py::arg("index") = 0,
       "Full (T+H) x 16 panel of one replicate of a built-in scenario.");

    m.def("scenario_json", [](int scenario) { return io::scenario_to_json(builtin_scenario(scenario)); },
          py::arg("scenario"));

    m.def("simulate_study", [](int scenario, int reps, std::uint64_t seed, const std::vector<std::string>& forecasters,
                               const std::vector<std::string>& estimators, std::size_t threads) {
        auto spec = builtin_scenario(scenario);
        spec.replications = reps;
        spec.seed = seed;
        StudyOptions options;
        for (const auto& f : forecasters) options.forecasters.push_back(ForecasterSpec::parse(f, spec.period));
        options.estimators.clear();
        for (const auto& e : estimators) options.estimators.push_back(parse_covariance_kind(e));
        options.threads = threads;
        py::gil_scoped_release release;
        return report::study_files(run_study(spec, options));
    }, py::arg("scenario"), py::arg("reps"), py::arg("seed") = 42,
       py::arg("forecasters") = std::vector<std::string>{"arx"},
       py::arg("estimators") = std::vector<std::string>{"shrinkage"}, py::arg("threads") = 1,
       "Runs a study and returns the rendered summary files as {name: text}.");
}
