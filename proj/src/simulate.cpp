#include "mvrec/simulate.hpp"

#include "mvrec/error.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>

namespace mvrec {

NodeTree three_level_tree() {
    return NodeTree::from_edges({{"Total", std::nullopt},
                                 {"A", "Total"},
                                 {"B", "Total"},
                                 {"AA", "A"},
                                 {"AB", "A"},
                                 {"BA", "B"},
                                 {"BB", "B"},
                                 {"BC", "B"}});
}

namespace {

Eigen::MatrixXd between_variable(int which) {
    const double rho = which == 1 ? 0.0 : which == 2 ? 0.7 : -0.7;
    Eigen::MatrixXd v(2, 2);
    v << 1.0, rho, rho, 1.0;
    return v;
}

// Correlation `rho` within the {AA, AB} and {BA, BB, BC} subtrees.
Eigen::MatrixXd between_node(int which) {
    const double rho = which == 1 ? 0.0 : which == 2 ? 0.7 : -0.4;
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(5, 5);
    s(0, 1) = s(1, 0) = rho;
    for (int i = 2; i < 5; ++i) {
        for (int j = 2; j < 5; ++j) {
            if (i != j) s(i, j) = rho;
        }
    }
    return s;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) throw FactorizationError(std::string(what) + " is not positive definite");
    return llt.matrixL();
}

}  // namespace

ScenarioSpec builtin_scenario(int id) {
    if (id < 1 || id > 9) throw ArgumentError("scenario id must be 1..9");
    ScenarioSpec spec;
    spec.V = between_variable((id - 1) / 3 + 1);
    spec.Sigma = between_node((id - 1) % 3 + 1);
    spec.Phi.resize(2, 2);
    spec.Phi << 0.7, 0.2, 0.2, 0.7;
    spec.scenario_id = id;
    return spec;
}

double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

void ScenarioSpec::validate() const {
    const Hierarchy h(tree);
    const auto nb = static_cast<Eigen::Index>(h.n_bottom());
    const auto mm = static_cast<Eigen::Index>(m());
    if (mm == 0) throw ArgumentError("scenario needs at least one variable");
    if (V.rows() != mm || V.cols() != mm) throw ArgumentError("V must be m x m");
    if (Phi.rows() != mm || Phi.cols() != mm) throw ArgumentError("Phi must be m x m");
    if (Sigma.rows() != nb || Sigma.cols() != nb) throw ArgumentError("Sigma must be n_b x n_b");
    if (!V.isApprox(V.transpose(), 1e-12)) throw ArgumentError("V must be symmetric");
    if (!Sigma.isApprox(Sigma.transpose(), 1e-12)) throw ArgumentError("Sigma must be symmetric");
    (void)cholesky_lower(V, "V");
    (void)cholesky_lower(Sigma, "Sigma");
    if (!(spectral_radius(Phi) < 1.0)) throw ArgumentError("Phi must have spectral radius < 1");
    if (period < 1) throw ArgumentError("period must be positive");
    if (T < 1 || H < 1) throw ArgumentError("T and H must be positive");
    if (replications < 0) throw ArgumentError("replication count must be non-negative");
    if (burn_in < 0) throw ArgumentError("burn-in must be non-negative");
    if (!(alpha_low <= alpha_high)) throw ArgumentError("alpha range is empty");
}

std::vector<Eigen::MatrixXd> draw_noise(const ScenarioSpec& spec, std::size_t length, Rng& rng) {
    const Eigen::MatrixXd ls = cholesky_lower(spec.Sigma, "Sigma");
    const Eigen::MatrixXd lv = cholesky_lower(spec.V, "V");
    const Eigen::Index nb = spec.Sigma.rows();
    const Eigen::Index m = spec.V.rows();
    std::vector<Eigen::MatrixXd> out;
    out.reserve(length);
    Eigen::MatrixXd z(nb, m);
    for (std::size_t t = 0; t < length; ++t) {
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < nb; ++i) z(i, j) = rng.normal();
        }
        out.emplace_back(ls * z * lv.transpose());
    }
    return out;
}

std::vector<Eigen::MatrixXd> simulate_var_errors(const ScenarioSpec& spec, std::size_t length, Rng& rng) {
    const auto burn = static_cast<std::size_t>(spec.burn_in);
    const auto noise = draw_noise(spec, burn + length, rng);
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(spec.Sigma.rows(), spec.V.rows());
    const Eigen::MatrixXd phi_t = spec.Phi.transpose();
    std::vector<Eigen::MatrixXd> out;
    out.reserve(length);
    for (std::size_t t = 0; t < noise.size(); ++t) {
        // row i: eta_i' = (Phi eta_{i,t-1})' + eps_i'
        eta = eta * phi_t + noise[t];
        if (t >= burn) out.push_back(eta);
    }
    return out;
}

SimulatedReplicate simulate_replicate(const ScenarioSpec& spec, Rng& rng) {
    const Hierarchy h(spec.tree);
    const auto nb = static_cast<Eigen::Index>(h.n_bottom());
    const auto m = static_cast<Eigen::Index>(spec.m());
    const auto length = static_cast<std::size_t>(spec.T + spec.H);

    SimulatedReplicate out;
    out.alphas.resize(nb);
    for (Eigen::Index i = 0; i < nb; ++i) out.alphas(i) = rng.uniform(spec.alpha_low, spec.alpha_high);

    const auto eta = simulate_var_errors(spec, length, rng);
    Eigen::MatrixXd bottom(static_cast<Eigen::Index>(length), nb * m);
    for (std::size_t k = 0; k < length; ++k) {
        const double t = static_cast<double>(k + 1);
        const double season = std::sin(2.0 * std::numbers::pi * t / spec.period);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < nb; ++i) {
                bottom(static_cast<Eigen::Index>(k), j * nb + i) = out.alphas(i) * season + eta[k](i, j);
            }
        }
    }
    out.panel = aggregate_bottom(h, bottom, spec.variables);
    out.panel.t0 = 1;
    out.seed_used = spec.seed;
    return out;
}

SimulatedReplicate simulate_replicate(const ScenarioSpec& spec, std::uint64_t index) {
    Rng rng(spec.seed, index);
    auto out = simulate_replicate(spec, rng);
    out.replicate = index;
    return out;
}

namespace {

struct ReplicateOutcome {
    std::map<std::string, std::map<std::string, Eigen::MatrixXd>> errors;  // forecaster -> method -> errors
    Eigen::VectorXd scale;
    std::vector<std::string> warnings;
    std::optional<std::string> failure;
};

ReplicateOutcome run_replicate(const ScenarioSpec& spec, const Hierarchy& h, const StudyOptions& options,
                               std::size_t index) {
    ReplicateOutcome out;
    try {
        const auto rep = simulate_replicate(spec, static_cast<std::uint64_t>(index));
        const auto train = rep.panel.slice(0, static_cast<std::size_t>(spec.T));
        const Eigen::MatrixXd actual = rep.panel.data.middleRows(spec.T, spec.H);
        for (const auto& fc : options.forecasters) {
            out.errors[fc.name()] = evaluate_split(train, actual, h, fc, options.estimators, options.method,
                                                   &out.warnings);
        }
        const auto s = seasonal_scale(train, spec.period);
        out.scale.resize(static_cast<Eigen::Index>(s.size()));
        for (std::size_t c = 0; c < s.size(); ++c) out.scale(static_cast<Eigen::Index>(c)) = s[c].value_or(0.0);
    } catch (const Error& e) {
        out.errors.clear();
        out.failure = e.what();
    }
    return out;
}

}  // namespace

StudyResult run_study(const ScenarioSpec& spec, const StudyOptions& options) {
    spec.validate();
    if (options.forecasters.empty()) throw ArgumentError("at least one forecaster required");
    if (options.estimators.empty()) throw ArgumentError("at least one estimator required");
    for (const auto& fc : options.forecasters) {
        fc.validate();
        if (static_cast<std::size_t>(spec.T) < fc.min_train_length()) {
            throw ArgumentError(fc.name() + " needs T >= " + std::to_string(fc.min_train_length()));
        }
    }

    const Hierarchy h(spec.tree);
    const auto reps = static_cast<std::size_t>(spec.replications);
    std::vector<ReplicateOutcome> outcomes(reps);

    std::size_t threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    threads = std::min(threads, std::max<std::size_t>(reps, 1));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < reps; k = next.fetch_add(1)) {
            outcomes[k] = run_replicate(spec, h, options, k);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    StudyResult result;
    result.spec = spec;
    result.options = options;
    const double radius = spectral_radius(spec.Phi);
    if (radius >= 0.95) {
        result.warnings.push_back("slow-mixing VAR(1): Phi spectral radius " + std::to_string(radius));
    }
    for (const auto& fc : options.forecasters) {
        result.cubes.emplace(fc.name(), ErrorCube(h.nodes(), spec.variables, static_cast<std::size_t>(spec.H)));
    }
    constexpr std::size_t kMaxWarnings = 20;
    for (std::size_t k = 0; k < reps; ++k) {
        auto& o = outcomes[k];
        if (o.failure) {
            result.failures.push_back({k, *o.failure});
            continue;
        }
        for (auto& [name, errors] : o.errors) result.cubes.at(name).add_slice(static_cast<long>(k), errors, o.scale);
        for (const auto& w : o.warnings) {
            if (result.warnings.size() < kMaxWarnings) result.warnings.push_back("replicate " + std::to_string(k) + ": " + w);
        }
        ++result.completed;
    }
    return result;
}

}  // namespace mvrec
