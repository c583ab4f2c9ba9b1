#include "mvrec/covariance.hpp"

#include "mvrec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvrec {

ResidualPanel ResidualPanel::from_rows(const Eigen::MatrixXd& raw, std::vector<std::string> labels) {
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != raw.cols()) {
        throw ShapeError("residual label count does not match column count");
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index t = 0; t < raw.rows(); ++t) {
        if (raw.row(t).allFinite()) keep.push_back(t);
    }
    ResidualPanel out;
    out.values.resize(static_cast<Eigen::Index>(keep.size()), raw.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) out.values.row(static_cast<Eigen::Index>(k)) = raw.row(keep[k]);
    out.labels = std::move(labels);
    return out;
}

ResidualPanel ResidualPanel::columns(Eigen::Index first, Eigen::Index count) const {
    ResidualPanel out;
    out.values = values.middleCols(first, count);
    if (!labels.empty()) {
        out.labels.assign(labels.begin() + first, labels.begin() + first + count);
    }
    return out;
}

std::string_view to_string(CovarianceKind kind) {
    switch (kind) {
        case CovarianceKind::Sample: return "sample";
        case CovarianceKind::Shrinkage: return "shrinkage";
        case CovarianceKind::Identity: return "identity";
        case CovarianceKind::Diagonal: return "diagonal";
    }
    return "unknown";
}

CovarianceKind parse_covariance_kind(std::string_view name) {
    if (name == "sample") return CovarianceKind::Sample;
    if (name == "shrinkage") return CovarianceKind::Shrinkage;
    if (name == "identity") return CovarianceKind::Identity;
    if (name == "diagonal") return CovarianceKind::Diagonal;
    throw ArgumentError("unknown estimator '" + std::string(name) + "'");
}

namespace {

std::string column_name(const ResidualPanel& r, Eigen::Index j) {
    return r.labels.empty() ? "column " + std::to_string(j) : "'" + r.labels[static_cast<std::size_t>(j)] + "'";
}

Eigen::MatrixXd centred(const Eigen::MatrixXd& x) { return x.rowwise() - x.colwise().mean(); }

void symmetrize(Eigen::MatrixXd& w) { w = 0.5 * (w + w.transpose()).eval(); }

}  // namespace

CovarianceEstimate sample_covariance(const ResidualPanel& r) {
    if (r.rows() < 2) {
        throw InsufficientDataError("sample covariance needs at least 2 residual rows, got " + std::to_string(r.rows()));
    }
    const Eigen::MatrixXd x = centred(r.values);
    CovarianceEstimate est;
    est.W = (x.transpose() * x) / static_cast<double>(r.rows());
    symmetrize(est.W);
    est.kind = CovarianceKind::Sample;
    est.rank_deficient_possible = r.rows() < r.cols();
    return est;
}

CorrelationVariance variance_of_correlations(const ResidualPanel& r) {
    const Eigen::Index rows = r.rows();
    if (rows < 3) {
        throw InsufficientDataError("correlation variance needs at least 3 residual rows, got " + std::to_string(rows));
    }
    const Eigen::Index p = r.cols();
    const double R = static_cast<double>(rows);

    Eigen::MatrixXd z = centred(r.values);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double sd = std::sqrt(z.col(j).squaredNorm() / (R - 1.0));
        if (!(sd > 0.0)) throw ValidationError("zero-variance residual column " + column_name(r, j));
        z.col(j) /= sd;
    }

    // sum_t w_t and sum_t w_t^2 for w_t = z_i z_j
    const Eigen::MatrixXd sum_w = z.transpose() * z;
    const Eigen::MatrixXd z2 = z.array().square().matrix();
    const Eigen::MatrixXd sum_w2 = z2.transpose() * z2;

    CorrelationVariance out;
    out.r = sum_w / (R - 1.0);
    // sum_t (w - mean w)^2 = sum w^2 - (sum w)^2 / R
    const Eigen::MatrixXd ss = sum_w2 - sum_w.cwiseAbs2() / R;
    out.var_r = (R / std::pow(R - 1.0, 3)) * ss.cwiseMax(0.0);
    out.var_r.diagonal().setZero();
    out.r.diagonal().setOnes();
    symmetrize(out.r);
    symmetrize(out.var_r);
    return out;
}

double raw_shrinkage_intensity(const CorrelationVariance& cv) {
    const double num = cv.var_r.sum() - cv.var_r.diagonal().sum();
    const double den = cv.r.squaredNorm() - cv.r.diagonal().squaredNorm();
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

CovarianceEstimate shrinkage_covariance(const ResidualPanel& r, std::optional<double> fixed_lambda) {
    if (r.rows() < 3) {
        throw InsufficientDataError("shrinkage covariance needs at least 3 residual rows, got " +
                                    std::to_string(r.rows()));
    }
    CovarianceEstimate est = sample_covariance(r);
    double lambda = 0.0;
    if (fixed_lambda) {
        if (!(*fixed_lambda >= 0.0 && *fixed_lambda <= 1.0)) throw ArgumentError("lambda must lie in [0, 1]");
        lambda = *fixed_lambda;
    } else {
        const double raw = raw_shrinkage_intensity(variance_of_correlations(r));
        lambda = std::clamp(raw, 0.0, 1.0);
    }
    if (lambda >= 1.0) {
        est.W = Eigen::MatrixXd(est.W.diagonal().asDiagonal());
    } else if (lambda > 0.0) {
        const Eigen::VectorXd d = est.W.diagonal();
        est.W *= (1.0 - lambda);
        est.W.diagonal() = d;
    }
    est.kind = CovarianceKind::Shrinkage;
    est.lambda = lambda;
    return est;
}

CovarianceEstimate identity_covariance(Eigen::Index dim) {
    CovarianceEstimate est;
    est.W = Eigen::MatrixXd::Identity(dim, dim);
    est.kind = CovarianceKind::Identity;
    return est;
}

CovarianceEstimate diagonal_covariance(const ResidualPanel& r) {
    CovarianceEstimate est = sample_covariance(r);
    est.W = Eigen::MatrixXd(est.W.diagonal().asDiagonal());
    est.kind = CovarianceKind::Diagonal;
    est.rank_deficient_possible = false;
    return est;
}

CovarianceEstimate estimate_covariance(CovarianceKind kind, const ResidualPanel& r) {
    switch (kind) {
        case CovarianceKind::Sample: return sample_covariance(r);
        case CovarianceKind::Shrinkage: return shrinkage_covariance(r);
        case CovarianceKind::Identity: return identity_covariance(r.cols());
        case CovarianceKind::Diagonal: return diagonal_covariance(r);
    }
    throw ArgumentError("unknown covariance kind");
}

}  // namespace mvrec
