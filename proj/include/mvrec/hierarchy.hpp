#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mvrec {

/**
 * Aggregation tree. `nodes` is ordered with every aggregate (internal) node
 * before every bottom (leaf) node; within each block the order is the order
 * the caller supplied.
 */
struct NodeTree {
    std::vector<std::string> nodes;
    std::map<std::string, std::string> parent;  // absent for the root
    std::map<std::string, std::string> labels;  // optional display names

    /// Builds a tree from (id, parent) pairs in any order. Aggregates are
    /// moved in front of leaves, ordered by depth; leaves keep input order.
    static NodeTree from_edges(const std::vector<std::pair<std::string, std::optional<std::string>>>& edges);

    [[nodiscard]] std::string label(const std::string& id) const;
};

/// Summing-matrix view of a validated NodeTree. Immutable after construction.
class Hierarchy {
public:
    explicit Hierarchy(NodeTree tree);

    [[nodiscard]] const NodeTree& tree() const noexcept { return tree_; }
    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return tree_.nodes; }

    /// n x n_b binary summing matrix; the last n_b rows are the identity.
    [[nodiscard]] const Eigen::MatrixXd& S() const noexcept { return S_; }
    /// n_a x n_b aggregation rows of S.
    [[nodiscard]] Eigen::MatrixXd A() const { return S_.topRows(n_aggregate_); }

    [[nodiscard]] std::size_t n() const noexcept { return tree_.nodes.size(); }
    [[nodiscard]] std::size_t n_bottom() const noexcept { return n() - n_aggregate_; }
    [[nodiscard]] std::size_t n_aggregate() const noexcept { return n_aggregate_; }

    /// Position of `id` in the node order; throws ArgumentError if unknown.
    [[nodiscard]] std::size_t index_of(const std::string& id) const;
    [[nodiscard]] bool contains(const std::string& id) const { return index_.count(id) != 0; }

    [[nodiscard]] std::vector<std::string> bottom_nodes() const;

private:
    NodeTree tree_;
    std::size_t n_aggregate_ = 0;
    Eigen::MatrixXd S_;
    std::map<std::string, std::size_t> index_;
};

/// Validates `tree` and builds S. Throws StructureError naming the offending node.
Hierarchy build_hierarchy(const NodeTree& tree);

struct ConstraintMatrices {
    Eigen::MatrixXd J;  // n_b x n, [0 | I]
    Eigen::MatrixXd C;  // n_a x n, [I | -A]
};

ConstraintMatrices constraint_matrices(const Hierarchy& h);

struct KroneckerSystem {
    Eigen::MatrixXd S;  // nm x n_b m
    Eigen::MatrixXd C;  // n_a m x nm
    Eigen::MatrixXd J;  // n_b m x nm
};

/// I_m (x) S, I_m (x) C and I_m (x) J. Throws ArgumentError for m == 0.
KroneckerSystem kron_extend(const Hierarchy& h, std::size_t m);

/// Dense Kronecker product.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/**
 * T x n x m observations stored as T rows of vec(Y_t).
 *
 * vec ordering is variable-major: column j*n + i holds node i of variable j,
 * so the first n entries of a row are every node for variable 0.
 */
struct MultiPanel {
    Eigen::MatrixXd data;                  // T x (n*m)
    std::vector<std::string> node_order;
    std::vector<std::string> var_order;
    std::vector<std::string> time_labels;  // optional, size T when present
    long t0 = 1;                           // integer index of the first row
    std::string frequency;

    [[nodiscard]] std::size_t length() const noexcept { return static_cast<std::size_t>(data.rows()); }
    [[nodiscard]] std::size_t n() const noexcept { return node_order.size(); }
    [[nodiscard]] std::size_t m() const noexcept { return var_order.size(); }

    [[nodiscard]] double at(std::size_t t, std::size_t node, std::size_t var) const {
        return data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(var * n() + node));
    }

    /// Rows [begin, begin + count) with metadata preserved and t0 shifted.
    [[nodiscard]] MultiPanel slice(std::size_t begin, std::size_t count) const;

    /// max over t of ||C* vec(Y_t)||_inf <= 1e-8 * (1 + max |Y|).
    [[nodiscard]] bool coherent(const Hierarchy& h) const;
};

/// Column index of (node, var) in a vec-ordered row.
inline std::size_t vec_index(std::size_t node, std::size_t var, std::size_t n) { return var * n + node; }

/// Labels "node:variable" in vec order.
std::vector<std::string> vec_labels(const std::vector<std::string>& nodes, const std::vector<std::string>& vars);

/// Largest |C* y| over the rows of `rows` (each a vec-ordered observation).
double max_constraint_violation(const Hierarchy& h, std::size_t m, const Eigen::MatrixXd& rows);

/**
 * Builds the full panel from bottom-level series. `bottom` holds T rows of
 * vec(B_t) (n_b * m columns, variable-major).
 */
MultiPanel aggregate_bottom(const Hierarchy& h, const Eigen::MatrixXd& bottom, std::vector<std::string> var_order);

}  // namespace mvrec
