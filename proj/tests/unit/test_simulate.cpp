#include "support.hpp"

#include "mvrec/error.hpp"
#include "mvrec/report.hpp"
#include "mvrec/simulate.hpp"

#include <doctest.h>

#include <numbers>

using namespace mvrec;
using Eigen::MatrixXd;

namespace {

/// Empirical covariance of vec(E_t) over a noise sequence, about the known zero mean.
MatrixXd vec_covariance(const std::vector<MatrixXd>& noise) {
    const auto d = noise.front().size();
    MatrixXd acc = MatrixXd::Zero(d, d);
    for (const auto& e : noise) {
        const Eigen::Map<const Eigen::VectorXd> v(e.data(), d);
        acc.noalias() += v * v.transpose();
    }
    return acc / static_cast<double>(noise.size());
}

}  // namespace

TEST_CASE("built-in scenarios") {
    const auto s1 = builtin_scenario(1);
    CHECK(s1.V == MatrixXd::Identity(2, 2));
    CHECK(s1.Sigma == MatrixXd::Identity(5, 5));
    const auto s5 = builtin_scenario(5);
    CHECK(s5.V(0, 1) == 0.7);
    CHECK(s5.Sigma(0, 1) == 0.7);
    CHECK(s5.Sigma(2, 4) == 0.7);
    CHECK(s5.Sigma(1, 2) == 0.0);
    const auto s9 = builtin_scenario(9);
    CHECK(s9.V(1, 0) == -0.7);
    CHECK(s9.Sigma(3, 4) == -0.4);
    CHECK(s9.Phi(0, 1) == 0.2);
    CHECK(s9.Phi(1, 1) == 0.7);
    CHECK(s9.T == 108);
    CHECK(s9.H == 12);
    CHECK(s9.period == 4);
    CHECK(s9.replications == 1000);
    for (int id = 1; id <= 9; ++id) CHECK_NOTHROW(builtin_scenario(id).validate());
    try {
        (void)builtin_scenario(10);
        FAIL("expected ArgumentError");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()) == "scenario id must be 1..9");
    }
    CHECK_THROWS_AS(builtin_scenario(0), ArgumentError);
}

TEST_CASE("spec validation") {
    auto spec = builtin_scenario(1);
    spec.Phi << 1.0, 0.2, 0.2, 1.0;
    CHECK_THROWS_AS(spec.validate(), ArgumentError);
    spec = builtin_scenario(1);
    spec.V(0, 1) = spec.V(1, 0) = 1.5;
    CHECK_THROWS(spec.validate());
    spec = builtin_scenario(1);
    spec.Sigma = MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(spec.validate(), ArgumentError);
    CHECK(spectral_radius(builtin_scenario(1).Phi) == doctest::Approx(0.9));
}

TEST_CASE("white noise covariance") {
    Rng rng(3, 0);
    const auto noise = draw_noise(builtin_scenario(1), 100000, rng);
    CHECK((vec_covariance(noise) - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("Kronecker noise identity in scenarios 5 and 9") {
    for (const int id : {5, 9}) {
        const auto spec = builtin_scenario(id);
        Rng rng(17, static_cast<std::uint64_t>(id));
        const auto cov = vec_covariance(draw_noise(spec, 100000, rng));
        // cov(E_ij, E_kl) sits at (j*nb + i, l*nb + k).
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 5; ++k)
                    for (int l = 0; l < 2; ++l)
                        REQUIRE(std::abs(cov(j * 5 + i, l * 5 + k) - spec.Sigma(i, k) * spec.V(j, l)) < 0.05);
    }
}

TEST_CASE("noise-free limit reproduces the seasonal signal") {
    auto spec = builtin_scenario(1);
    spec.Phi.setZero();
    spec.V *= 1e-8;
    spec.Sigma *= 1e-8;
    spec.validate();
    const auto rep = simulate_replicate(spec, std::uint64_t{4});
    const double total_alpha = rep.alphas.sum();
    for (int t = 0; t < 120; ++t) {
        const double s = std::sin(2.0 * std::numbers::pi * (t + 1) / 4.0);
        CHECK(std::abs(rep.panel.data(t, 0) - total_alpha * s) < 1e-3);  // Total, v1
        CHECK(std::abs(rep.panel.data(t, 8 + 3) - rep.alphas(0) * s) < 1e-3);  // AA, v2
    }
}

TEST_CASE("replicates are deterministic, coherent and draw alpha in range") {
    const auto spec = builtin_scenario(7);
    const Hierarchy h(spec.tree);
    for (std::uint64_t k = 0; k < 20; ++k) {
        const auto a = simulate_replicate(spec, k);
        const auto b = simulate_replicate(spec, k);
        CHECK(a.panel.data == b.panel.data);
        CHECK(a.panel.length() == 120);
        CHECK(a.panel.coherent(h));
        CHECK(a.alphas.minCoeff() >= 0.0);
        CHECK(a.alphas.maxCoeff() < 4.0);
    }
    CHECK(simulate_replicate(spec, std::uint64_t{0}).panel.data != simulate_replicate(spec, std::uint64_t{1}).panel.data);
}

TEST_CASE("VAR(1) lag-one autocovariance satisfies Gamma1 = Phi Gamma0") {
    const auto spec = builtin_scenario(1);
    Rng rng(21, 0);
    const auto eta = simulate_var_errors(spec, 100000, rng);
    MatrixXd g0 = MatrixXd::Zero(2, 2), g1 = MatrixXd::Zero(2, 2);
    for (std::size_t t = 1; t < eta.size(); ++t) {
        const Eigen::RowVector2d cur = eta[t].row(0);
        const Eigen::RowVector2d prev = eta[t - 1].row(0);
        g0 += prev.transpose() * prev;
        g1 += cur.transpose() * prev;
    }
    const MatrixXd predicted = spec.Phi * g0;
    CHECK(((g1 - predicted).cwiseAbs().array() / predicted.cwiseAbs().array()).maxCoeff() < 0.05);
}

TEST_CASE("study results do not depend on the thread count") {
    auto spec = builtin_scenario(3);
    spec.replications = 6;
    spec.seed = 42;
    StudyOptions opts;
    opts.forecasters = {ForecasterSpec::parse("arx", 4), ForecasterSpec::parse("var1", 4)};
    opts.estimators = {CovarianceKind::Shrinkage, CovarianceKind::Sample};
    opts.threads = 1;
    const auto one = run_study(spec, opts);
    opts.threads = 4;
    const auto four = run_study(spec, opts);
    CHECK(one.completed == 6);
    CHECK(report::study_files(one) == report::study_files(four));
    for (const auto& [name, cube] : one.cubes) {
        CHECK(cube.methods() == std::vector<std::string>{"base", "multi:sample", "multi:shrinkage", "uni:sample",
                                                         "uni:shrinkage"});
        for (const auto& method : cube.methods()) CHECK(cube.sq_errors(method) == four.cubes.at(name).sq_errors(method));
        CHECK(cube.slice_ids() == std::vector<long>{0, 1, 2, 3, 4, 5});
    }
}

TEST_CASE("seasonal-mean residuals are coherent, so the sample estimator cannot reconcile them") {
    auto spec = builtin_scenario(3);
    spec.replications = 2;
    StudyOptions opts;
    opts.forecasters = {ForecasterSpec::parse("seasonal-mean", 4)};
    opts.estimators = {CovarianceKind::Sample};
    const auto r = run_study(spec, opts);
    CHECK(r.completed == 0);
    REQUIRE(r.failures.size() == 2);
    CHECK(r.failures[0].message.find("use the shrinkage estimator") != std::string::npos);
    opts.estimators = {CovarianceKind::Shrinkage};
    CHECK(run_study(spec, opts).completed == 2);
}

TEST_CASE("slow-mixing spec warns but runs") {
    auto spec = builtin_scenario(1);
    spec.Phi << 0.79, 0.2, 0.2, 0.79;
    spec.replications = 2;
    StudyOptions opts;
    opts.forecasters = {ForecasterSpec::parse("arx", 4)};
    const auto result = run_study(spec, opts);
    CHECK(result.completed == 2);
    REQUIRE_FALSE(result.warnings.empty());
    CHECK(result.warnings.front().find("slow-mixing") != std::string::npos);
}

TEST_CASE("failing replicates are recorded and skipped") {
    auto spec = builtin_scenario(1);
    spec.replications = 3;
    // 100 lags leave 8 usable rows for 104 coefficients, so every fit fails.
    StudyOptions opts;
    opts.forecasters = {ForecasterSpec::parse("arx:100", 4)};
    opts.estimators = {CovarianceKind::Sample};
    const auto result = run_study(spec, opts);
    CHECK(result.completed == 0);
    CHECK(result.failures.size() == 3);
    CHECK(result.failures[1].replicate == 1);
}
