#include "mvrec/baseforecast.hpp"

#include "mvrec/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvrec {

void ForecasterSpec::validate() const {
    if (ar_order < 0) throw ArgumentError("AR order must be non-negative");
    if ((seasonal_dummies || kind == ForecasterKind::SeasonalMean) && period < 2) {
        throw ArgumentError("seasonal period must be at least 2");
    }
}

std::string ForecasterSpec::name() const {
    switch (kind) {
        case ForecasterKind::SeasonalMean: return "seasonal-mean";
        case ForecasterKind::ARX: return ar_order == 1 ? "arx" : "arx:" + std::to_string(ar_order);
        case ForecasterKind::VAR1: return "var1";
    }
    return "unknown";
}

int ForecasterSpec::warmup() const {
    switch (kind) {
        case ForecasterKind::SeasonalMean: return 0;
        case ForecasterKind::ARX: return ar_order;
        case ForecasterKind::VAR1: return 1;
    }
    return 0;
}

std::size_t ForecasterSpec::min_train_length() const {
    const int lags = warmup();
    if (kind == ForecasterKind::SeasonalMean || seasonal_dummies) {
        return static_cast<std::size_t>(std::max(2 * period, lags + period + 2));
    }
    return static_cast<std::size_t>(lags + 3);
}

ForecasterSpec ForecasterSpec::parse(std::string_view text, int period) {
    ForecasterSpec spec;
    spec.period = period;
    if (text == "seasonal-mean") {
        spec.kind = ForecasterKind::SeasonalMean;
        spec.ar_order = 0;
    } else if (text == "var1") {
        spec.kind = ForecasterKind::VAR1;
        spec.ar_order = 1;
    } else if (text == "arx") {
        spec.kind = ForecasterKind::ARX;
    } else if (text.rfind("arx:", 0) == 0) {
        spec.kind = ForecasterKind::ARX;
        const std::string order(text.substr(4));
        std::size_t used = 0;
        int value = -1;
        try {
            value = std::stoi(order, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != order.size() || value < 0) throw ArgumentError("bad ARX order in '" + std::string(text) + "'");
        spec.ar_order = value;
    } else {
        throw ArgumentError("unknown forecaster '" + std::string(text) + "'");
    }
    spec.validate();
    return spec;
}

namespace {

int season_of(long t, int period) {
    const long s = t % period;
    return static_cast<int>(s < 0 ? s + period : s);
}

Eigen::MatrixXd least_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const std::string& name) {
    if (X.rows() < X.cols()) {
        throw FitError("series " + name + ": " + std::to_string(X.rows()) + " usable rows for " +
                       std::to_string(X.cols()) + " coefficients");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) throw FitError("series " + name + ": collinear regression design");
    return qr.solve(Y);
}

void check_length(const ForecasterSpec& spec, std::size_t T) {
    if (T < spec.min_train_length()) {
        throw InsufficientDataError(spec.name() + " needs at least " + std::to_string(spec.min_train_length()) +
                                    " training observations, got " + std::to_string(T));
    }
}

}  // namespace

ArxFit fit_arx(const Eigen::VectorXd& y, const ForecasterSpec& spec, long t0, std::size_t horizons,
               const std::string& series_name) {
    spec.validate();
    check_length(spec, static_cast<std::size_t>(y.size()));
    const int p = spec.ar_order;
    const int dummies = spec.seasonal_dummies ? spec.period - 1 : 0;
    const Eigen::Index cols = 1 + p + dummies;
    const Eigen::Index T = y.size();

    auto fill_row = [&](auto&& row, long t, auto&& lag) {
        row(0) = 1.0;
        for (int k = 1; k <= p; ++k) row(k) = lag(k);
        for (int s = 1; s <= dummies; ++s) row(p + s) = season_of(t, spec.period) == s ? 1.0 : 0.0;
    };

    Eigen::MatrixXd X(T - p, cols);
    for (Eigen::Index t = p; t < T; ++t) {
        fill_row(X.row(t - p), t0 + t, [&](int k) { return y(t - k); });
    }
    const Eigen::VectorXd target = y.tail(T - p);

    ArxFit fit;
    fit.coef = least_squares(X, target, series_name);
    fit.residuals = target - X * fit.coef;

    // Iterated multi-step forecasts.
    Eigen::VectorXd path(T + static_cast<Eigen::Index>(horizons));
    path.head(T) = y;
    Eigen::RowVectorXd x(cols);
    for (Eigen::Index t = T; t < path.size(); ++t) {
        fill_row(x, t0 + t, [&](int k) { return path(t - k); });
        path(t) = x.dot(fit.coef);
    }
    fit.forecast = path.tail(static_cast<Eigen::Index>(horizons));
    return fit;
}

Var1Fit fit_var1(const Eigen::MatrixXd& y, const ForecasterSpec& spec, long t0, std::size_t horizons,
                 const std::string& node_name) {
    spec.validate();
    check_length(spec, static_cast<std::size_t>(y.rows()));
    const Eigen::Index T = y.rows();
    const Eigen::Index m = y.cols();
    const int dummies = spec.seasonal_dummies ? spec.period - 1 : 0;
    const Eigen::Index cols = 1 + m + dummies;

    auto fill_row = [&](auto&& row, long t, const Eigen::RowVectorXd& prev) {
        row(0) = 1.0;
        row.segment(1, m) = prev;
        for (int s = 1; s <= dummies; ++s) row(m + s) = season_of(t, spec.period) == s ? 1.0 : 0.0;
    };

    Eigen::MatrixXd X(T - 1, cols);
    for (Eigen::Index t = 1; t < T; ++t) fill_row(X.row(t - 1), t0 + t, y.row(t - 1));
    const Eigen::MatrixXd target = y.bottomRows(T - 1);
    const Eigen::MatrixXd B = least_squares(X, target, node_name);

    Var1Fit fit;
    fit.intercept = B.row(0).transpose();
    fit.phi = B.middleRows(1, m).transpose();
    if (dummies > 0) fit.seasonal = B.bottomRows(dummies).transpose();
    fit.residuals = target - X * B;
    fit.spectral_radius = Eigen::EigenSolver<Eigen::MatrixXd>(fit.phi, false).eigenvalues().cwiseAbs().maxCoeff();

    fit.forecast.resize(static_cast<Eigen::Index>(horizons), m);
    Eigen::RowVectorXd prev = y.row(T - 1);
    Eigen::RowVectorXd x(cols);
    for (Eigen::Index h = 0; h < fit.forecast.rows(); ++h) {
        fill_row(x, t0 + T + h, prev);
        prev = x * B;
        fit.forecast.row(h) = prev;
    }
    return fit;
}

BaseForecastSet fit_forecast(const ForecasterSpec& spec, const MultiPanel& train, std::size_t horizons) {
    spec.validate();
    if (horizons < 1) throw ArgumentError("horizon count must be at least 1");
    const std::size_t n = train.n();
    const std::size_t m = train.m();
    const auto T = static_cast<Eigen::Index>(train.length());
    const auto nm = static_cast<Eigen::Index>(n * m);
    if (train.data.cols() != nm) throw ShapeError("panel width does not equal n*m");
    if (!train.data.allFinite()) throw ValidationError("training panel contains non-finite values");
    check_length(spec, train.length());

    const int warm = spec.warmup();
    const auto labels = vec_labels(train.node_order, train.var_order);

    BaseForecastSet out;
    out.origin = train.t0 + T;
    out.yhat.resize(static_cast<Eigen::Index>(horizons), nm);
    Eigen::MatrixXd resid(T - warm, nm);

    switch (spec.kind) {
        case ForecasterKind::SeasonalMean: {
            for (Eigen::Index c = 0; c < nm; ++c) {
                Eigen::VectorXd sum = Eigen::VectorXd::Zero(spec.period);
                Eigen::VectorXd count = Eigen::VectorXd::Zero(spec.period);
                for (Eigen::Index t = 0; t < T; ++t) {
                    const int s = season_of(train.t0 + t, spec.period);
                    sum(s) += train.data(t, c);
                    count(s) += 1.0;
                }
                const Eigen::VectorXd mean = sum.cwiseQuotient(count);
                for (Eigen::Index t = 0; t < T; ++t) {
                    resid(t, c) = train.data(t, c) - mean(season_of(train.t0 + t, spec.period));
                }
                for (Eigen::Index h = 0; h < out.yhat.rows(); ++h) {
                    out.yhat(h, c) = mean(season_of(train.t0 + T + h, spec.period));
                }
            }
            break;
        }
        case ForecasterKind::ARX: {
            for (Eigen::Index c = 0; c < nm; ++c) {
                auto fit = fit_arx(train.data.col(c), spec, train.t0, horizons, labels[static_cast<std::size_t>(c)]);
                resid.col(c) = fit.residuals;
                out.yhat.col(c) = fit.forecast;
            }
            break;
        }
        case ForecasterKind::VAR1: {
            const auto nn = static_cast<Eigen::Index>(n);
            for (Eigen::Index i = 0; i < nn; ++i) {
                Eigen::MatrixXd y(T, static_cast<Eigen::Index>(m));
                for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) y.col(j) = train.data.col(j * nn + i);
                auto fit = fit_var1(y, spec, train.t0, horizons, train.node_order[static_cast<std::size_t>(i)]);
                if (fit.spectral_radius >= 1.0) {
                    out.warnings.push_back("node " + train.node_order[static_cast<std::size_t>(i)] +
                                           ": fitted VAR(1) spectral radius " + std::to_string(fit.spectral_radius) +
                                           " >= 1");
                }
                for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) {
                    resid.col(j * nn + i) = fit.residuals.col(j);
                    out.yhat.col(j * nn + i) = fit.forecast.col(j);
                }
            }
            break;
        }
    }
    out.residuals = ResidualPanel::from_rows(resid, labels);
    return out;
}

BaseForecastSet import_external(const ExternalForecastBundle& bundle, const Hierarchy& h,
                                const std::vector<std::string>& var_order) {
    const std::size_t n = h.n();
    const std::size_t m = var_order.size();
    const auto nm = static_cast<Eigen::Index>(n * m);
    if (m == 0) throw ShapeError("bundle needs at least one variable");
    if (bundle.yhat.rows() < 1) throw ShapeError("bundle has no forecast horizons");
    if (bundle.yhat.cols() != nm) {
        throw ShapeError("bundle forecasts have " + std::to_string(bundle.yhat.cols()) + " columns, expected " +
                         std::to_string(nm));
    }
    if (bundle.residuals.cols() != nm) {
        throw ShapeError("bundle residuals have " + std::to_string(bundle.residuals.cols()) + " columns, expected " +
                         std::to_string(nm));
    }
    for (Eigen::Index hh = 0; hh < bundle.yhat.rows(); ++hh) {
        for (Eigen::Index c = 0; c < nm; ++c) {
            if (!std::isfinite(bundle.yhat(hh, c))) {
                const auto node = static_cast<std::size_t>(c) % n;
                const auto var = static_cast<std::size_t>(c) / n;
                throw ValidationError("non-finite forecast at (h=" + std::to_string(hh + 1) + ", node=" +
                                      h.nodes()[node] + ", variable=" + var_order[var] + ")");
            }
        }
    }
    if (!bundle.residuals.values.allFinite()) throw ValidationError("bundle residual panel contains non-finite values");

    BaseForecastSet out;
    out.yhat = bundle.yhat;
    out.residuals = bundle.residuals;
    if (out.residuals.labels.empty()) out.residuals.labels = vec_labels(h.nodes(), var_order);
    out.origin = bundle.origin;
    return out;
}

}  // namespace mvrec
