#pragma once

#include "mvrec/hierarchy.hpp"
#include "mvrec/reconcile.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace mvrec {

enum class ForecasterKind { SeasonalMean, ARX, VAR1 };

/**
 * Deterministic least-squares base forecasters.
 *
 *  - SeasonalMean: per-season average of the training sample.
 *  - ARX: intercept + `ar_order` lags + (period - 1) seasonal dummies, per series.
 *  - VAR1: per node, the m variables regressed jointly on their first lag
 *    (plus intercept and optional seasonal dummies).
 */
struct ForecasterSpec {
    ForecasterKind kind = ForecasterKind::ARX;
    int ar_order = 1;
    bool seasonal_dummies = true;
    int period = 4;

    void validate() const;
    [[nodiscard]] std::string name() const;
    /// Lags consumed before the first residual.
    [[nodiscard]] int warmup() const;
    [[nodiscard]] std::size_t min_train_length() const;

    /// "seasonal-mean", "arx", "arx:<order>", "var1".
    static ForecasterSpec parse(std::string_view text, int period);
};

/// Fitted single-series ARX model.
struct ArxFit {
    Eigen::VectorXd coef;       // intercept, lags, dummies
    Eigen::VectorXd residuals;  // length T - ar_order
    Eigen::VectorXd forecast;   // length H
};

/// `t0` is the absolute time index of y(0), used for seasonal alignment.
ArxFit fit_arx(const Eigen::VectorXd& y, const ForecasterSpec& spec, long t0, std::size_t horizons,
               const std::string& series_name = "series");

struct Var1Fit {
    Eigen::VectorXd intercept;  // m
    Eigen::MatrixXd phi;        // m x m
    Eigen::MatrixXd seasonal;   // m x (period - 1), empty without dummies
    Eigen::MatrixXd residuals;  // (T - 1) x m
    Eigen::MatrixXd forecast;   // H x m
    double spectral_radius = 0.0;
};

/// `y` is T x m (one node, all variables).
Var1Fit fit_var1(const Eigen::MatrixXd& y, const ForecasterSpec& spec, long t0, std::size_t horizons,
                 const std::string& node_name = "node");

/// Base forecasts for every node and variable, plus aligned one-step residuals.
BaseForecastSet fit_forecast(const ForecasterSpec& spec, const MultiPanel& train, std::size_t horizons);

/// Forecasts produced by an outside toolchain.
struct ExternalForecastBundle {
    Eigen::MatrixXd yhat;  // H x (n*m)
    ResidualPanel residuals;
    std::string provenance;
    long origin = 0;
};

/// Validates shapes and finiteness, naming the first bad (h, node, variable).
BaseForecastSet import_external(const ExternalForecastBundle& bundle, const Hierarchy& h,
                                const std::vector<std::string>& var_order);

}  // namespace mvrec
