#pragma once

#include "mvrec/baseforecast.hpp"
#include "mvrec/covariance.hpp"
#include "mvrec/hierarchy.hpp"
#include "mvrec/reconcile.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mvrec {

/**
 * Squared forecast errors indexed by (slice, node, variable, horizon) for
 * several methods. A slice is a simulation replicate or a forecast origin.
 * Each method stores a slices x (H * n * m) matrix; column h*n*m + j*n + i.
 */
class ErrorCube {
public:
    ErrorCube() = default;
    ErrorCube(std::vector<std::string> nodes, std::vector<std::string> vars, std::size_t horizons);

    [[nodiscard]] std::size_t n() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t m() const noexcept { return vars_.size(); }
    [[nodiscard]] std::size_t horizons() const noexcept { return horizons_; }
    [[nodiscard]] std::size_t slices() const noexcept { return slice_ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<std::string>& vars() const noexcept { return vars_; }
    [[nodiscard]] const std::vector<long>& slice_ids() const noexcept { return slice_ids_; }
    [[nodiscard]] std::vector<std::string> methods() const;
    [[nodiscard]] bool has_method(const std::string& method) const { return errors_.count(method) != 0; }

    /// Appends a slice. `errors` maps method -> H x (n*m) signed errors;
    /// every existing method must be present. `scale` (n*m) is optional.
    void add_slice(long id, const std::map<std::string, Eigen::MatrixXd>& errors,
                   const Eigen::VectorXd& scale = Eigen::VectorXd());

    [[nodiscard]] double sq_error(const std::string& method, std::size_t slice, std::size_t node, std::size_t var,
                                  std::size_t h) const;
    [[nodiscard]] const Eigen::MatrixXd& sq_errors(const std::string& method) const;

    /// Seasonal-naive scale per slice (slices x n*m); empty when not recorded.
    [[nodiscard]] const Eigen::MatrixXd& scales() const noexcept { return scales_; }

    [[nodiscard]] std::size_t column(std::size_t node, std::size_t var, std::size_t h) const {
        return (h * m() + var) * n() + node;
    }

private:
    std::vector<std::string> nodes_;
    std::vector<std::string> vars_;
    std::size_t horizons_ = 0;
    std::vector<long> slice_ids_;
    std::map<std::string, Eigen::MatrixXd> errors_;
    Eigen::MatrixXd scales_;
};

/// Per-(node, variable, horizon) values; nullopt marks an undefined cell.
struct MetricTable {
    std::string kind;
    std::vector<std::string> nodes;
    std::vector<std::string> vars;
    std::size_t horizons = 0;
    std::vector<std::optional<double>> values;  // index (h*m + j)*n + i

    MetricTable() = default;
    MetricTable(std::string kind, std::vector<std::string> nodes, std::vector<std::string> vars, std::size_t horizons);

    [[nodiscard]] std::optional<double>& at(std::size_t node, std::size_t var, std::size_t h) {
        return values[(h * vars.size() + var) * nodes.size() + node];
    }
    [[nodiscard]] const std::optional<double>& at(std::size_t node, std::size_t var, std::size_t h) const {
        return values[(h * vars.size() + var) * nodes.size() + node];
    }
};

/// sqrt(mean over slices of squared error). Undefined when there are no slices.
MetricTable rmse(const ErrorCube& cube, const std::string& method);

/// 1 - RMSE_num / RMSE_den; undefined when RMSE_den is zero.
MetricTable rel_rmse(const ErrorCube& cube, const std::string& numerator, const std::string& denominator);

/// Mean squared seasonal difference of each training column; nullopt when zero.
std::vector<std::optional<double>> seasonal_scale(const MultiPanel& train, int period);

struct RmsseResult {
    std::vector<std::optional<double>> per_h;   // RMSSE_h
    Eigen::MatrixXd q2;                          // H x (n*m), NaN where undefined
    std::vector<std::string> undefined_series;  // constant seasonal series
};

/// `errors` is H x (n*m) of actual minus forecast.
RmsseResult rmsse(const Eigen::MatrixXd& errors, const MultiPanel& train, int period);

/// RMSSE per horizon from cube slices, averaged over slices with a defined value.
std::vector<std::optional<double>> mean_rmsse(const ErrorCube& cube, const std::string& method);

struct MetricSummary {
    std::vector<std::optional<double>> mean_per_h;  // mean over the n*m series
    std::optional<double> pct_nonnegative;          // over all defined cells
    std::size_t defined_cells = 0;
    std::size_t negative_cells = 0;
};

MetricSummary summarize(const MetricTable& table);

/// Index of the smallest defined value per horizon across candidates; nullopt if none.
std::vector<std::optional<std::size_t>> best_per_horizon(
    const std::vector<std::vector<std::optional<double>>>& candidates);

struct CvResult {
    ErrorCube cube;
    std::vector<long> skipped;
    std::vector<std::string> warnings;
};

/**
 * Expanding-window rolling-origin evaluation. Each origin is the number of
 * training rows; forecasts cover rows [origin, origin + H). Infeasible
 * origins are skipped and listed. Methods recorded: "base" plus
 * "multi:<est>" and "uni:<est>" per estimator.
 */
CvResult rolling_origin_cv(const MultiPanel& panel, const Hierarchy& h, const ForecasterSpec& spec,
                           const std::vector<CovarianceKind>& estimators, const std::vector<long>& origins,
                           std::size_t horizons, Method method = Method::ProjectionM);

/// Base / multivariate / univariate reconciled errors for one train/test split.
/// Shared by the simulation study and the rolling-origin evaluation.
std::map<std::string, Eigen::MatrixXd> evaluate_split(const MultiPanel& train, const Eigen::MatrixXd& actual,
                                                      const Hierarchy& h, const ForecasterSpec& spec,
                                                      const std::vector<CovarianceKind>& estimators, Method method,
                                                      std::vector<std::string>* warnings = nullptr);

}  // namespace mvrec
