#pragma once

#include "mvrec/covariance.hpp"
#include "mvrec/hierarchy.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace mvrec {

/// h-step base forecasts plus the in-sample residuals they came from.
struct BaseForecastSet {
    Eigen::MatrixXd yhat;  // H x (n*m), row h-1 = vec(Yhat_{T+h})
    ResidualPanel residuals;
    long origin = 0;       // index T of the forecast origin
    std::vector<std::string> warnings;

    [[nodiscard]] Eigen::Index horizons() const noexcept { return yhat.rows(); }
};

enum class Method { Direct, ProjectionJ, ProjectionM, Univariate };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct ReconciledForecastSet {
    Eigen::MatrixXd ytilde;  // H x (n*m)
    Method method = Method::ProjectionM;
    CovarianceKind w_kind = CovarianceKind::Shrinkage;
};

/**
 * Linear reconciliation operator G (nm x nm) such that vec(Ytilde) = G vec(Yhat).
 *
 * Built once per (hierarchy, m, W, method) with Cholesky factorizations and
 * shared read-only across horizons. Univariate is not a single-W method and
 * is rejected here; use reconcile_univariate.
 */
class Reconciler {
public:
    Reconciler(const Hierarchy& h, std::size_t m, const Eigen::MatrixXd& W, Method method);

    [[nodiscard]] const Eigen::MatrixXd& op() const noexcept { return G_; }
    [[nodiscard]] Method method() const noexcept { return method_; }

    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& yhat) const;
    /// Each row is one vec-ordered forecast.
    [[nodiscard]] Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& rows) const;

private:
    Method method_;
    Eigen::MatrixXd G_;
};

/// Reciprocal condition threshold below which C* W C*' counts as singular.
inline constexpr double kMinReciprocalCondition = 1e-12;

/// S*(S*'W^-1 S*)^-1 S*'W^-1 vec(Yhat). Requires W positive definite.
ReconciledForecastSet reconcile_direct(const BaseForecastSet& base, const CovarianceEstimate& W, const Hierarchy& h,
                                       std::size_t m);

/// S*[J* - J* W C*'(C* W C*')^-1 C*] vec(Yhat).
ReconciledForecastSet reconcile_projection_J(const BaseForecastSet& base, const CovarianceEstimate& W,
                                             const Hierarchy& h, std::size_t m);

/// M* vec(Yhat) with M* = I - W C*'(C* W C*')^-1 C*.
ReconciledForecastSet reconcile_projection_M(const BaseForecastSet& base, const CovarianceEstimate& W,
                                             const Hierarchy& h, std::size_t m);

ReconciledForecastSet reconcile(Method method, const BaseForecastSet& base, const CovarianceEstimate& W,
                                const Hierarchy& h, std::size_t m);

/// Single-variable reconciliation; `yhat_j` is H x n, `W_j` is n x n.
Eigen::MatrixXd reconcile_univariate(const Eigen::MatrixXd& yhat_j, const Eigen::MatrixXd& W_j, const Hierarchy& h);

/// Reconciles each variable separately with its own n x n covariance.
ReconciledForecastSet reconcile_per_variable(const BaseForecastSet& base,
                                             const std::vector<CovarianceEstimate>& per_variable,
                                             const Hierarchy& h);

}  // namespace mvrec
