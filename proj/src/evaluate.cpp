#include "mvrec/evaluate.hpp"

#include "mvrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvrec {

ErrorCube::ErrorCube(std::vector<std::string> nodes, std::vector<std::string> vars, std::size_t horizons)
    : nodes_(std::move(nodes)), vars_(std::move(vars)), horizons_(horizons) {}

std::vector<std::string> ErrorCube::methods() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : errors_) out.push_back(name);
    return out;
}

void ErrorCube::add_slice(long id, const std::map<std::string, Eigen::MatrixXd>& errors, const Eigen::VectorXd& scale) {
    const auto nm = static_cast<Eigen::Index>(n() * m());
    const auto width = static_cast<Eigen::Index>(horizons_) * nm;
    if (slices() > 0 && errors.size() != errors_.size()) throw ShapeError("slice methods differ from the cube's");
    for (const auto& [name, e] : errors) {
        if (e.rows() != static_cast<Eigen::Index>(horizons_) || e.cols() != nm) {
            throw ShapeError("error slice for '" + name + "' has the wrong shape");
        }
        if (slices() > 0 && !errors_.count(name)) throw ShapeError("unexpected method '" + name + "' in slice");
    }
    const auto k = static_cast<Eigen::Index>(slices());
    for (const auto& [name, e] : errors) {
        auto& store = errors_[name];
        store.conservativeResize(k + 1, width);
        for (Eigen::Index h = 0; h < e.rows(); ++h) store.row(k).segment(h * nm, nm) = e.row(h).array().square();
    }
    if (scale.size() > 0) {
        if (scale.size() != nm) throw ShapeError("scale vector must have n*m entries");
        if (k > 0 && scales_.rows() != k) throw ShapeError("scales must be recorded for every slice or none");
        scales_.conservativeResize(k + 1, nm);
        scales_.row(k) = scale.transpose();
    } else if (scales_.rows() > 0) {
        throw ShapeError("scales must be recorded for every slice or none");
    }
    slice_ids_.push_back(id);
}

const Eigen::MatrixXd& ErrorCube::sq_errors(const std::string& method) const {
    auto it = errors_.find(method);
    if (it == errors_.end()) throw ArgumentError("method '" + method + "' not in error cube");
    return it->second;
}

double ErrorCube::sq_error(const std::string& method, std::size_t slice, std::size_t node, std::size_t var,
                           std::size_t h) const {
    return sq_errors(method)(static_cast<Eigen::Index>(slice), static_cast<Eigen::Index>(column(node, var, h)));
}

MetricTable::MetricTable(std::string kind_, std::vector<std::string> nodes_, std::vector<std::string> vars_,
                         std::size_t horizons_)
    : kind(std::move(kind_)), nodes(std::move(nodes_)), vars(std::move(vars_)), horizons(horizons_),
      values(horizons * nodes.size() * vars.size()) {}

MetricTable rmse(const ErrorCube& cube, const std::string& method) {
    MetricTable out("rmse", cube.nodes(), cube.vars(), cube.horizons());
    const auto& sq = cube.sq_errors(method);
    if (cube.slices() == 0) return out;
    for (Eigen::Index c = 0; c < sq.cols(); ++c) {
        out.values[static_cast<std::size_t>(c)] = std::sqrt(sq.col(c).mean());
    }
    return out;
}

MetricTable rel_rmse(const ErrorCube& cube, const std::string& numerator, const std::string& denominator) {
    const auto num = rmse(cube, numerator);
    const auto den = rmse(cube, denominator);
    MetricTable out("relrmse", cube.nodes(), cube.vars(), cube.horizons());
    out.kind = "relrmse(" + numerator + "/" + denominator + ")";
    for (std::size_t c = 0; c < out.values.size(); ++c) {
        if (num.values[c] && den.values[c] && *den.values[c] > 0.0) {
            out.values[c] = 1.0 - *num.values[c] / *den.values[c];
        }
    }
    return out;
}

std::vector<std::optional<double>> seasonal_scale(const MultiPanel& train, int period) {
    const auto T = static_cast<Eigen::Index>(train.length());
    if (period < 1 || T <= period) throw InsufficientDataError("seasonal scale needs more than `period` observations");
    std::vector<std::optional<double>> out(static_cast<std::size_t>(train.data.cols()));
    for (Eigen::Index c = 0; c < train.data.cols(); ++c) {
        const Eigen::VectorXd diff = train.data.col(c).tail(T - period) - train.data.col(c).head(T - period);
        const double mean_sq = diff.squaredNorm() / static_cast<double>(T - period);
        if (mean_sq > 0.0) out[static_cast<std::size_t>(c)] = mean_sq;
    }
    return out;
}

RmsseResult rmsse(const Eigen::MatrixXd& errors, const MultiPanel& train, int period) {
    if (errors.cols() != train.data.cols()) throw ShapeError("error columns do not match the training panel");
    const auto scale = seasonal_scale(train, period);
    const auto labels = vec_labels(train.node_order, train.var_order);
    RmsseResult out;
    out.q2 = Eigen::MatrixXd::Constant(errors.rows(), errors.cols(), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index c = 0; c < errors.cols(); ++c) {
        const auto& s = scale[static_cast<std::size_t>(c)];
        if (!s) {
            out.undefined_series.push_back(c < static_cast<Eigen::Index>(labels.size())
                                               ? labels[static_cast<std::size_t>(c)]
                                               : "column " + std::to_string(c));
            continue;
        }
        out.q2.col(c) = errors.col(c).array().square() / *s;
    }
    out.per_h.resize(static_cast<std::size_t>(errors.rows()));
    if (out.undefined_series.empty()) {
        for (Eigen::Index h = 0; h < errors.rows(); ++h) out.per_h[static_cast<std::size_t>(h)] = std::sqrt(out.q2.row(h).mean());
    }
    return out;
}

std::vector<std::optional<double>> mean_rmsse(const ErrorCube& cube, const std::string& method) {
    const auto& sq = cube.sq_errors(method);
    const auto& scales = cube.scales();
    if (cube.slices() > 0 && scales.rows() != static_cast<Eigen::Index>(cube.slices())) {
        throw ArgumentError("error cube carries no seasonal scales");
    }
    const auto nm = static_cast<Eigen::Index>(cube.n() * cube.m());
    std::vector<std::optional<double>> out(cube.horizons());
    for (std::size_t h = 0; h < cube.horizons(); ++h) {
        double total = 0.0;
        std::size_t used = 0;
        for (Eigen::Index k = 0; k < sq.rows(); ++k) {
            if (!(scales.row(k).array() > 0.0).all()) continue;
            const auto block = sq.row(k).segment(static_cast<Eigen::Index>(h) * nm, nm);
            total += std::sqrt((block.array() / scales.row(k).array()).mean());
            ++used;
        }
        if (used > 0) out[h] = total / static_cast<double>(used);
    }
    return out;
}

MetricSummary summarize(const MetricTable& table) {
    MetricSummary out;
    const std::size_t nm = table.nodes.size() * table.vars.size();
    out.mean_per_h.resize(table.horizons);
    for (std::size_t h = 0; h < table.horizons; ++h) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t c = 0; c < nm; ++c) {
            const auto& v = table.values[h * nm + c];
            if (!v) continue;
            total += *v;
            ++count;
            ++out.defined_cells;
            if (*v < 0.0) ++out.negative_cells;
        }
        if (count > 0) out.mean_per_h[h] = total / static_cast<double>(count);
    }
    if (out.defined_cells > 0) {
        out.pct_nonnegative = 100.0 * static_cast<double>(out.defined_cells - out.negative_cells) /
                              static_cast<double>(out.defined_cells);
    }
    return out;
}

std::vector<std::optional<std::size_t>> best_per_horizon(
    const std::vector<std::vector<std::optional<double>>>& candidates) {
    std::size_t horizons = 0;
    for (const auto& c : candidates) horizons = std::max(horizons, c.size());
    std::vector<std::optional<std::size_t>> out(horizons);
    for (std::size_t h = 0; h < horizons; ++h) {
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (h >= candidates[k].size() || !candidates[k][h]) continue;
            if (!out[h] || *candidates[k][h] < *candidates[*out[h]][h]) out[h] = k;
        }
    }
    return out;
}

std::map<std::string, Eigen::MatrixXd> evaluate_split(const MultiPanel& train, const Eigen::MatrixXd& actual,
                                                      const Hierarchy& h, const ForecasterSpec& spec,
                                                      const std::vector<CovarianceKind>& estimators, Method method,
                                                      std::vector<std::string>* warnings) {
    const std::size_t m = train.m();
    const auto n = static_cast<Eigen::Index>(h.n());
    const auto base = fit_forecast(spec, train, static_cast<std::size_t>(actual.rows()));
    if (warnings) warnings->insert(warnings->end(), base.warnings.begin(), base.warnings.end());

    std::map<std::string, Eigen::MatrixXd> errors;
    errors["base"] = actual - base.yhat;
    for (const auto kind : estimators) {
        const std::string tag(to_string(kind));
        const auto W = estimate_covariance(kind, base.residuals);
        const auto multi = method == Method::Univariate ? reconcile(Method::ProjectionM, base, W, h, m)
                                                        : reconcile(method, base, W, h, m);
        errors["multi:" + tag] = actual - multi.ytilde;

        std::vector<CovarianceEstimate> blocks;
        for (std::size_t j = 0; j < m; ++j) {
            blocks.push_back(estimate_covariance(kind, base.residuals.columns(static_cast<Eigen::Index>(j) * n, n)));
        }
        errors["uni:" + tag] = actual - reconcile_per_variable(base, blocks, h).ytilde;
    }
    return errors;
}

CvResult rolling_origin_cv(const MultiPanel& panel, const Hierarchy& h, const ForecasterSpec& spec,
                           const std::vector<CovarianceKind>& estimators, const std::vector<long>& origins,
                           std::size_t horizons, Method method) {
    if (horizons < 1) throw ArgumentError("horizon count must be at least 1");
    if (origins.empty()) throw ArgumentError("at least one forecast origin required");
    if (panel.n() != h.n()) throw ShapeError("panel node count does not match the hierarchy");

    CvResult out;
    out.cube = ErrorCube(panel.node_order, panel.var_order, horizons);
    const auto len = static_cast<long>(panel.length());
    const auto min_len = static_cast<long>(spec.min_train_length());
    const auto H = static_cast<long>(horizons);
    for (const long origin : origins) {
        if (origin < min_len || origin + H > len) {
            out.skipped.push_back(origin);
            out.warnings.push_back("origin " + std::to_string(origin) + " infeasible (needs " +
                                   std::to_string(min_len) + " <= origin <= " + std::to_string(len - H) + "), skipped");
            continue;
        }
        const auto train = panel.slice(0, static_cast<std::size_t>(origin));
        const Eigen::MatrixXd actual = panel.data.middleRows(origin, H);
        auto errors = evaluate_split(train, actual, h, spec, estimators, method, &out.warnings);
        Eigen::VectorXd scale(train.data.cols());
        const auto s = seasonal_scale(train, spec.period);
        for (std::size_t c = 0; c < s.size(); ++c) scale(static_cast<Eigen::Index>(c)) = s[c].value_or(0.0);
        out.cube.add_slice(origin, errors, scale);
    }
    return out;
}

}  // namespace mvrec
