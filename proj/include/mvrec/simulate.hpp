#pragma once

#include "mvrec/baseforecast.hpp"
#include "mvrec/covariance.hpp"
#include "mvrec/evaluate.hpp"
#include "mvrec/hierarchy.hpp"
#include "mvrec/random.hpp"
#include "mvrec/reconcile.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mvrec {

/// Total -> {A, B}; A -> {AA, AB}; B -> {BA, BB, BC}.
NodeTree three_level_tree();

/**
 * One simulation scenario: bottom series follow
 *   b_{i,t} = alpha_i sin(2 pi t / period) 1_m + eta_{i,t},
 *   eta_{i,t} = Phi eta_{i,t-1} + eps_{i,t},  cov(vec E_t) = V (x) Sigma.
 */
struct ScenarioSpec {
    NodeTree tree = three_level_tree();
    std::vector<std::string> variables{"v1", "v2"};
    Eigen::MatrixXd V;      // m x m, between variables
    Eigen::MatrixXd Sigma;  // n_b x n_b, between bottom nodes
    Eigen::MatrixXd Phi;    // m x m
    int period = 4;
    int T = 108;
    int H = 12;
    double alpha_low = 0.0;
    double alpha_high = 4.0;
    int replications = 1000;
    std::uint64_t seed = 0;
    int scenario_id = 0;  // 1..9 for built-ins, 0 for custom
    int burn_in = 200;

    /// Throws ArgumentError / FactorizationError when an invariant fails.
    void validate() const;
    [[nodiscard]] std::size_t m() const noexcept { return variables.size(); }
};

/// Scenario `id` in 1..9: V_{(id-1)/3 + 1} with Sigma_{(id-1)%3 + 1}.
ScenarioSpec builtin_scenario(int id);

/// Spectral radius of a square matrix.
double spectral_radius(const Eigen::MatrixXd& a);

/**
 * `length` noise matrices E_t (n_b x m) with vec(E_t) ~ N(0, V (x) Sigma),
 * drawn as L_Sigma Z L_V' for iid standard normal Z.
 */
std::vector<Eigen::MatrixXd> draw_noise(const ScenarioSpec& spec, std::size_t length, Rng& rng);

struct SimulatedReplicate {
    MultiPanel panel;  // T + H rows, t0 = 1
    Eigen::VectorXd alphas;
    std::uint64_t seed_used = 0;
    std::uint64_t replicate = 0;
};

/// Draw order: n_b amplitudes, then burn_in + T + H noise matrices.
SimulatedReplicate simulate_replicate(const ScenarioSpec& spec, Rng& rng);

/// Replicate `index` of `spec.seed`, drawn from its own Philox stream.
SimulatedReplicate simulate_replicate(const ScenarioSpec& spec, std::uint64_t index);

/// VAR(1) error path only (no seasonal term, no aggregation), burn-in included.
std::vector<Eigen::MatrixXd> simulate_var_errors(const ScenarioSpec& spec, std::size_t length, Rng& rng);

struct StudyOptions {
    std::vector<ForecasterSpec> forecasters;
    std::vector<CovarianceKind> estimators{CovarianceKind::Shrinkage};
    Method method = Method::ProjectionM;
    std::size_t threads = 1;
};

struct ReplicateFailure {
    std::size_t replicate = 0;
    std::string message;
};

/**
 * Cubes are keyed by forecaster name. Methods inside each cube are
 * "base", "multi:<estimator>" and "uni:<estimator>". Slices are the
 * completed replicates in index order; the cube's scale matrix holds the
 * seasonal-naive denominators of each replicate's training sample.
 */
struct StudyResult {
    ScenarioSpec spec;
    StudyOptions options;
    std::map<std::string, ErrorCube> cubes;
    std::vector<ReplicateFailure> failures;
    std::vector<std::string> warnings;
    std::size_t completed = 0;
};

StudyResult run_study(const ScenarioSpec& spec, const StudyOptions& options);

}  // namespace mvrec
