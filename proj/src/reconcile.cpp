#include "mvrec/reconcile.hpp"

#include "mvrec/error.hpp"

namespace mvrec {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Direct: return "direct";
        case Method::ProjectionJ: return "proj-j";
        case Method::ProjectionM: return "proj-m";
        case Method::Univariate: return "univariate";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "direct") return Method::Direct;
    if (name == "proj-j") return Method::ProjectionJ;
    if (name == "proj-m") return Method::ProjectionM;
    if (name == "univariate") return Method::Univariate;
    throw ArgumentError("unknown reconciliation method '" + std::string(name) + "'");
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& a, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        throw FactorizationError(std::string(what) +
                                 " is not positive definite (Cholesky failed); use the shrinkage estimator");
    }
    const double rc = llt.rcond();
    if (!(rc >= kMinReciprocalCondition)) {
        throw FactorizationError(std::string(what) + " is numerically singular (reciprocal condition " +
                                 std::to_string(rc) + "); use the shrinkage estimator");
    }
    return llt;
}

}  // namespace

Reconciler::Reconciler(const Hierarchy& h, std::size_t m, const Eigen::MatrixXd& W, Method method)
    : method_(method) {
    const auto sys = kron_extend(h, m);
    const Eigen::Index nm = sys.S.rows();
    if (W.rows() != nm || W.cols() != nm) {
        throw ShapeError("W is " + std::to_string(W.rows()) + "x" + std::to_string(W.cols()) + ", expected " +
                         std::to_string(nm) + "x" + std::to_string(nm));
    }
    if (!W.allFinite()) throw ValidationError("W contains non-finite entries");

    switch (method) {
        case Method::Direct: {
            const auto w_llt = factorize(W, "W");
            const Eigen::MatrixXd winv_s = w_llt.solve(sys.S);                 // W^-1 S*
            const Eigen::MatrixXd gram = sys.S.transpose() * winv_s;           // S*' W^-1 S*
            const auto g_llt = factorize(gram, "S*' W^-1 S*");
            G_ = sys.S * g_llt.solve(winv_s.transpose());
            break;
        }
        case Method::ProjectionJ:
        case Method::ProjectionM: {
            const Eigen::MatrixXd wc = W * sys.C.transpose();                 // W C*'
            const Eigen::MatrixXd cwc = sys.C * wc;                            // C* W C*'
            const auto llt = factorize(cwc, "C* W C*'");
            const Eigen::MatrixXd correction = wc * llt.solve(sys.C);          // W C*'(C* W C*')^-1 C*
            if (method == Method::ProjectionM) {
                G_ = Eigen::MatrixXd::Identity(nm, nm) - correction;
            } else {
                G_ = sys.S * (sys.J - sys.J * correction);
            }
            break;
        }
        case Method::Univariate:
            throw ArgumentError("univariate reconciliation needs per-variable covariances");
    }
}

Eigen::VectorXd Reconciler::apply(const Eigen::VectorXd& yhat) const {
    if (yhat.size() != G_.cols()) throw ShapeError("forecast vector has wrong length");
    return G_ * yhat;
}

Eigen::MatrixXd Reconciler::apply_rows(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != G_.cols()) throw ShapeError("forecast rows have wrong width");
    return rows * G_.transpose();
}

namespace {

void check_base(const BaseForecastSet& base, const Hierarchy& h, std::size_t m) {
    if (base.yhat.rows() < 1) throw ShapeError("base forecasts need at least one horizon");
    if (base.yhat.cols() != static_cast<Eigen::Index>(h.n() * m)) {
        throw ShapeError("base forecasts have " + std::to_string(base.yhat.cols()) + " columns, expected n*m = " +
                         std::to_string(h.n() * m));
    }
    if (!base.yhat.allFinite()) throw ValidationError("base forecasts contain non-finite values");
}

}  // namespace

ReconciledForecastSet reconcile(Method method, const BaseForecastSet& base, const CovarianceEstimate& W,
                                const Hierarchy& h, std::size_t m) {
    check_base(base, h, m);
    if (method == Method::Univariate) {
        const auto n = static_cast<Eigen::Index>(h.n());
        std::vector<CovarianceEstimate> blocks;
        for (std::size_t j = 0; j < m; ++j) {
            CovarianceEstimate b = W;
            b.W = W.W.block(static_cast<Eigen::Index>(j) * n, static_cast<Eigen::Index>(j) * n, n, n);
            blocks.push_back(std::move(b));
        }
        return reconcile_per_variable(base, blocks, h);
    }
    Reconciler op(h, m, W.W, method);
    return {op.apply_rows(base.yhat), method, W.kind};
}

ReconciledForecastSet reconcile_direct(const BaseForecastSet& base, const CovarianceEstimate& W, const Hierarchy& h,
                                       std::size_t m) {
    return reconcile(Method::Direct, base, W, h, m);
}

ReconciledForecastSet reconcile_projection_J(const BaseForecastSet& base, const CovarianceEstimate& W,
                                             const Hierarchy& h, std::size_t m) {
    return reconcile(Method::ProjectionJ, base, W, h, m);
}

ReconciledForecastSet reconcile_projection_M(const BaseForecastSet& base, const CovarianceEstimate& W,
                                             const Hierarchy& h, std::size_t m) {
    return reconcile(Method::ProjectionM, base, W, h, m);
}

Eigen::MatrixXd reconcile_univariate(const Eigen::MatrixXd& yhat_j, const Eigen::MatrixXd& W_j, const Hierarchy& h) {
    return Reconciler(h, 1, W_j, Method::Direct).apply_rows(yhat_j);
}

ReconciledForecastSet reconcile_per_variable(const BaseForecastSet& base,
                                             const std::vector<CovarianceEstimate>& per_variable,
                                             const Hierarchy& h) {
    const std::size_t m = per_variable.size();
    if (m == 0) throw ArgumentError("at least one per-variable covariance required");
    check_base(base, h, m);
    const auto n = static_cast<Eigen::Index>(h.n());
    ReconciledForecastSet out;
    out.ytilde.resize(base.yhat.rows(), base.yhat.cols());
    for (std::size_t j = 0; j < m; ++j) {
        const auto first = static_cast<Eigen::Index>(j) * n;
        out.ytilde.middleCols(first, n) = reconcile_univariate(base.yhat.middleCols(first, n), per_variable[j].W, h);
    }
    out.method = Method::Univariate;
    out.w_kind = per_variable.front().kind;
    return out;
}

}  // namespace mvrec
