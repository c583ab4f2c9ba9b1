#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.
// The oracles deliberately avoid the library's own code paths.

#include "mvrec/hierarchy.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Random tree with 2..max_nodes nodes; node k attaches to a random earlier node.
inline mvrec::NodeTree random_tree(std::mt19937_64& gen, int max_nodes) {
    std::uniform_int_distribution<int> count(2, max_nodes);
    const int n = count(gen);
    std::vector<std::pair<std::string, std::optional<std::string>>> edges{{"n0", std::nullopt}};
    for (int k = 1; k < n; ++k) {
        std::uniform_int_distribution<int> pick(0, k - 1);
        edges.emplace_back("n" + std::to_string(k), "n" + std::to_string(pick(gen)));
    }
    std::shuffle(edges.begin(), edges.end(), gen);
    return mvrec::NodeTree::from_edges(edges);
}

inline MatrixXd random_normal(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
    std::normal_distribution<double> z(0.0, sd);
    MatrixXd out(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = z(gen);
    }
    return out;
}

/// Well-conditioned symmetric positive definite matrix.
inline MatrixXd random_spd(std::mt19937_64& gen, Eigen::Index dim) {
    const MatrixXd a = random_normal(gen, dim, dim);
    return a * a.transpose() / static_cast<double>(dim) + 0.5 * MatrixXd::Identity(dim, dim);
}

/// S by walking each node's ancestor chain: S(i, b) = 1 iff i is b or an ancestor of b.
inline MatrixXd oracle_summing_matrix(const mvrec::NodeTree& tree) {
    std::vector<std::string> leaves;
    for (const auto& id : tree.nodes) {
        bool has_child = false;
        for (const auto& [child, parent] : tree.parent) has_child = has_child || parent == id;
        if (!has_child) leaves.push_back(id);
    }
    MatrixXd S = MatrixXd::Zero(static_cast<Eigen::Index>(tree.nodes.size()), static_cast<Eigen::Index>(leaves.size()));
    for (std::size_t b = 0; b < leaves.size(); ++b) {
        std::string cur = leaves[b];
        while (true) {
            const auto row = std::find(tree.nodes.begin(), tree.nodes.end(), cur) - tree.nodes.begin();
            S(row, static_cast<Eigen::Index>(b)) = 1.0;
            auto it = tree.parent.find(cur);
            if (it == tree.parent.end()) break;
            cur = it->second;
        }
    }
    return S;
}

inline MatrixXd oracle_kron(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index k = 0; k < b.rows(); ++k)
                for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return out;
}

/**
 * Constrained GLS via the KKT system
 *   [ W^-1  C' ] [x]   [W^-1 y]
 *   [ C     0  ] [l] = [  0   ]
 * solved with full-pivot LU. `Cstar` is the stacked constraint matrix.
 */
inline VectorXd oracle_kkt(const MatrixXd& Cstar, const MatrixXd& W, const VectorXd& y) {
    const Eigen::Index d = W.rows();
    const Eigen::Index k = Cstar.rows();
    const MatrixXd Winv = W.fullPivLu().inverse();
    MatrixXd K = MatrixXd::Zero(d + k, d + k);
    K.topLeftCorner(d, d) = Winv;
    K.topRightCorner(d, k) = Cstar.transpose();
    K.bottomLeftCorner(k, d) = Cstar;
    VectorXd rhs = VectorXd::Zero(d + k);
    rhs.head(d) = Winv * y;
    return K.fullPivLu().solve(rhs).head(d);
}

/// Constraint matrix built directly from the oracle S: rows of aggregates minus their descendants.
inline MatrixXd oracle_constraints(const MatrixXd& S, std::size_t m) {
    const Eigen::Index nb = S.cols();
    const Eigen::Index na = S.rows() - nb;
    MatrixXd C(na, S.rows());
    C << MatrixXd::Identity(na, na), -S.topRows(na);
    return oracle_kron(MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)), C);
}

inline double rel_diff(const MatrixXd& a, const MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

/// Schafer-Strimmer target-D shrinkage written as plain scalar loops.
struct ShrinkOracle {
    MatrixXd W;
    double lambda;
};

inline ShrinkOracle oracle_shrinkage(const MatrixXd& e) {
    const int R = static_cast<int>(e.rows());
    const int d = static_cast<int>(e.cols());
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (int j = 0; j < d; ++j) {
        for (int t = 0; t < R; ++t) mean[j] += e(t, j);
        mean[j] /= R;
        for (int t = 0; t < R; ++t) sd[j] += (e(t, j) - mean[j]) * (e(t, j) - mean[j]);
        sd[j] = std::sqrt(sd[j] / (R - 1));
    }
    MatrixXd W1(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int t = 0; t < R; ++t) s += (e(t, i) - mean[i]) * (e(t, j) - mean[j]);
            W1(i, j) = s / R;
        }
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            double wbar = 0.0;
            for (int t = 0; t < R; ++t) wbar += (e(t, i) - mean[i]) / sd[i] * (e(t, j) - mean[j]) / sd[j];
            wbar /= R;
            double v = 0.0;
            for (int t = 0; t < R; ++t) {
                const double w = (e(t, i) - mean[i]) / sd[i] * (e(t, j) - mean[j]) / sd[j];
                v += (w - wbar) * (w - wbar);
            }
            const double var_r = static_cast<double>(R) / std::pow(R - 1.0, 3) * v;
            const double r = static_cast<double>(R) / (R - 1.0) * wbar;
            num += var_r;
            den += r * r;
        }
    }
    double lambda = den == 0.0 ? 1.0 : num / den;
    lambda = std::min(1.0, std::max(0.0, lambda));
    MatrixXd W(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) W(i, j) = i == j ? W1(i, j) : (1.0 - lambda) * W1(i, j);
    return {W, lambda};
}

}  // namespace testsupport
