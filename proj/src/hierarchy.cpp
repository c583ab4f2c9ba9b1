#include "mvrec/hierarchy.hpp"

#include "mvrec/error.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace mvrec {

namespace {

// Depth of every node; throws on cycles or dangling parents.
std::map<std::string, std::size_t> node_depths(const NodeTree& tree) {
    std::set<std::string> known(tree.nodes.begin(), tree.nodes.end());
    std::map<std::string, std::size_t> depth;
    for (const auto& id : tree.nodes) {
        std::size_t d = 0;
        std::string cur = id;
        std::set<std::string> seen{cur};
        while (true) {
            auto it = tree.parent.find(cur);
            if (it == tree.parent.end()) break;
            if (!known.count(it->second)) {
                throw StructureError("node '" + cur + "' has unknown parent '" + it->second + "'");
            }
            if (!seen.insert(it->second).second) {
                throw StructureError("cycle detected through node '" + it->second + "'");
            }
            cur = it->second;
            ++d;
        }
        depth[id] = d;
    }
    return depth;
}

}  // namespace

NodeTree NodeTree::from_edges(const std::vector<std::pair<std::string, std::optional<std::string>>>& edges) {
    NodeTree raw;
    std::set<std::string> parents;
    for (const auto& [id, par] : edges) {
        raw.nodes.push_back(id);
        if (par) {
            raw.parent[id] = *par;
            parents.insert(*par);
        }
    }
    auto depth = node_depths(raw);

    std::vector<std::string> aggregates;
    std::vector<std::string> leaves;
    for (const auto& id : raw.nodes) {
        (parents.count(id) ? aggregates : leaves).push_back(id);
    }
    std::stable_sort(aggregates.begin(), aggregates.end(),
                     [&](const std::string& a, const std::string& b) { return depth.at(a) < depth.at(b); });

    NodeTree tree;
    tree.nodes = std::move(aggregates);
    tree.nodes.insert(tree.nodes.end(), leaves.begin(), leaves.end());
    tree.parent = std::move(raw.parent);
    return tree;
}

std::string NodeTree::label(const std::string& id) const {
    auto it = labels.find(id);
    return it == labels.end() ? id : it->second;
}

Hierarchy::Hierarchy(NodeTree tree) : tree_(std::move(tree)) {
    const auto& nodes = tree_.nodes;
    if (nodes.size() < 2) throw StructureError("hierarchy needs a root with at least one child");

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!index_.emplace(nodes[i], i).second) throw StructureError("duplicate node '" + nodes[i] + "'");
    }
    for (const auto& [child, par] : tree_.parent) {
        if (!index_.count(child)) throw StructureError("parent entry for unknown node '" + child + "'");
    }

    std::vector<std::string> roots;
    for (const auto& id : nodes) {
        if (!tree_.parent.count(id)) roots.push_back(id);
    }
    if (roots.empty()) throw StructureError("no root node: every node has a parent (cycle)");
    if (roots.size() > 1) throw StructureError("multiple roots: '" + roots[0] + "' and '" + roots[1] + "'");

    (void)node_depths(tree_);

    std::vector<std::size_t> child_count(nodes.size(), 0);
    for (const auto& [child, par] : tree_.parent) ++child_count[index_.at(par)];

    // Aggregates must form a prefix of the node order.
    std::optional<std::size_t> first_leaf;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (child_count[i] == 0) {
            if (!first_leaf) n_aggregate_ = i, first_leaf = i;
        } else if (first_leaf) {
            throw StructureError("bottom-level node '" + nodes[*first_leaf] + "' precedes aggregate '" + nodes[i] +
                                 "'; list aggregates first");
        }
    }

    const std::size_t nb = nodes.size() - n_aggregate_;
    S_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(nb));
    for (std::size_t k = 0; k < nb; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        std::string cur = nodes[n_aggregate_ + k];
        S_(static_cast<Eigen::Index>(index_.at(cur)), col) = 1.0;
        for (auto it = tree_.parent.find(cur); it != tree_.parent.end(); it = tree_.parent.find(cur)) {
            cur = it->second;
            S_(static_cast<Eigen::Index>(index_.at(cur)), col) = 1.0;
        }
    }
}

std::size_t Hierarchy::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ArgumentError("unknown node '" + id + "'");
    return it->second;
}

std::vector<std::string> Hierarchy::bottom_nodes() const {
    return {tree_.nodes.begin() + static_cast<std::ptrdiff_t>(n_aggregate_), tree_.nodes.end()};
}

Hierarchy build_hierarchy(const NodeTree& tree) { return Hierarchy(tree); }

ConstraintMatrices constraint_matrices(const Hierarchy& h) {
    const auto n = static_cast<Eigen::Index>(h.n());
    const auto na = static_cast<Eigen::Index>(h.n_aggregate());
    const auto nb = static_cast<Eigen::Index>(h.n_bottom());
    ConstraintMatrices out;
    out.J = Eigen::MatrixXd::Zero(nb, n);
    out.J.rightCols(nb).setIdentity();
    out.C = Eigen::MatrixXd::Zero(na, n);
    out.C.leftCols(na).setIdentity();
    out.C.rightCols(nb) = -h.S().topRows(na);
    return out;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

KroneckerSystem kron_extend(const Hierarchy& h, std::size_t m) {
    if (m == 0) throw ArgumentError("variable count m must be at least 1");
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    auto cj = constraint_matrices(h);
    return {kron(I, h.S()), kron(I, cj.C), kron(I, cj.J)};
}

std::vector<std::string> vec_labels(const std::vector<std::string>& nodes, const std::vector<std::string>& vars) {
    std::vector<std::string> out;
    out.reserve(nodes.size() * vars.size());
    for (const auto& v : vars) {
        for (const auto& node : nodes) out.push_back(node + ":" + v);
    }
    return out;
}

double max_constraint_violation(const Hierarchy& h, std::size_t m, const Eigen::MatrixXd& rows) {
    if (rows.size() == 0) return 0.0;
    const auto n = static_cast<Eigen::Index>(h.n());
    if (rows.cols() != n * static_cast<Eigen::Index>(m)) throw ShapeError("row width does not equal n*m");
    const Eigen::MatrixXd C = constraint_matrices(h).C;
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const Eigen::MatrixXd block = rows.middleCols(static_cast<Eigen::Index>(j) * n, n);
        worst = std::max(worst, (block * C.transpose()).cwiseAbs().maxCoeff());
    }
    return worst;
}

MultiPanel MultiPanel::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > length()) throw ShapeError("panel slice out of range");
    MultiPanel out;
    out.data = data.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
    out.node_order = node_order;
    out.var_order = var_order;
    if (!time_labels.empty()) {
        out.time_labels.assign(time_labels.begin() + static_cast<std::ptrdiff_t>(begin),
                               time_labels.begin() + static_cast<std::ptrdiff_t>(begin + count));
    }
    out.t0 = t0 + static_cast<long>(begin);
    out.frequency = frequency;
    return out;
}

bool MultiPanel::coherent(const Hierarchy& h) const {
    if (n() != h.n()) return false;
    const double scale = data.size() ? data.cwiseAbs().maxCoeff() : 0.0;
    return max_constraint_violation(h, m(), data) <= 1e-8 * (1.0 + scale);
}

MultiPanel aggregate_bottom(const Hierarchy& h, const Eigen::MatrixXd& bottom, std::vector<std::string> var_order) {
    const auto nb = static_cast<Eigen::Index>(h.n_bottom());
    const auto m = static_cast<Eigen::Index>(var_order.size());
    if (m == 0) throw ShapeError("at least one variable required");
    if (bottom.cols() != nb * m) {
        throw ShapeError("bottom panel has " + std::to_string(bottom.cols()) + " columns, expected n_b*m = " +
                         std::to_string(nb * m));
    }
    const auto n = static_cast<Eigen::Index>(h.n());
    MultiPanel out;
    out.data.resize(bottom.rows(), n * m);
    for (Eigen::Index j = 0; j < m; ++j) {
        out.data.middleCols(j * n, n).noalias() = bottom.middleCols(j * nb, nb) * h.S().transpose();
    }
    out.node_order = h.nodes();
    out.var_order = std::move(var_order);
    return out;
}

}  // namespace mvrec
