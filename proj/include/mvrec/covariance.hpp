#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mvrec {

/// One-step in-sample residuals, one vec-ordered row per time point.
struct ResidualPanel {
    Eigen::MatrixXd values;           // R x (n*m), all finite
    std::vector<std::string> labels;  // "node:variable", vec order

    /// Drops every row containing a non-finite entry.
    static ResidualPanel from_rows(const Eigen::MatrixXd& raw, std::vector<std::string> labels);

    [[nodiscard]] Eigen::Index rows() const noexcept { return values.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return values.cols(); }

    /// Columns [first, first + count), used for per-variable blocks.
    [[nodiscard]] ResidualPanel columns(Eigen::Index first, Eigen::Index count) const;
};

enum class CovarianceKind { Sample, Shrinkage, Identity, Diagonal };

std::string_view to_string(CovarianceKind kind);
CovarianceKind parse_covariance_kind(std::string_view name);

struct CovarianceEstimate {
    Eigen::MatrixXd W;
    CovarianceKind kind = CovarianceKind::Sample;
    std::optional<double> lambda;  // shrinkage intensity, Shrinkage only
    double k_h = 1.0;
    bool rank_deficient_possible = false;
};

/// ML sample covariance (1/R) of column-centred residuals. Needs R >= 2.
CovarianceEstimate sample_covariance(const ResidualPanel& r);

/**
 * Shrinks the sample covariance toward its diagonal:
 *   W = lambda * diag(W1) + (1 - lambda) * W1,
 *   lambda = sum_{i!=j} Var(r_ij) / sum_{i!=j} r_ij^2, clamped to [0, 1].
 * `fixed_lambda` bypasses the data-driven intensity. Needs R >= 3 and no
 * zero-variance column.
 */
CovarianceEstimate shrinkage_covariance(const ResidualPanel& r, std::optional<double> fixed_lambda = std::nullopt);

struct CorrelationVariance {
    Eigen::MatrixXd var_r;  // estimated Var(r_ij), zero diagonal
    Eigen::MatrixXd r;      // sample correlation, unit diagonal
};

/// Var(r_ij) = R / (R-1)^3 * sum_t (w_ij,t - mean w_ij)^2 over products of
/// standardised residuals (centred, scaled with the R-1 standard deviation).
CorrelationVariance variance_of_correlations(const ResidualPanel& r);

/// Shrinkage intensity before clamping; +inf when every r_ij is zero.
double raw_shrinkage_intensity(const CorrelationVariance& cv);

CovarianceEstimate identity_covariance(Eigen::Index dim);
CovarianceEstimate diagonal_covariance(const ResidualPanel& r);

/// Dispatch on kind. Identity ignores the residual values.
CovarianceEstimate estimate_covariance(CovarianceKind kind, const ResidualPanel& r);

}  // namespace mvrec
