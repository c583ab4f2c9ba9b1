#include "support.hpp"

#include "mvrec/covariance.hpp"
#include "mvrec/error.hpp"
#include "mvrec/random.hpp"
#include "mvrec/simulate.hpp"

#include <doctest.h>

using namespace mvrec;
using Eigen::MatrixXd;

namespace {

ResidualPanel panel_of(const MatrixXd& x) { return ResidualPanel::from_rows(x, {}); }

}  // namespace

TEST_CASE("sample covariance of two rows") {
    MatrixXd x(2, 2);
    x << 1, 0, -1, 0;
    const auto est = sample_covariance(panel_of(x));
    MatrixXd expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK(est.W == expected);
    CHECK(est.kind == CovarianceKind::Sample);
    CHECK(est.k_h == 1.0);
}

TEST_CASE("identical rows give a zero covariance") {
    const MatrixXd x = MatrixXd::Constant(5, 3, 2.5);
    CHECK(sample_covariance(panel_of(x)).W.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample covariance preconditions and flags") {
    CHECK_THROWS_AS(sample_covariance(panel_of(MatrixXd::Ones(1, 2))), InsufficientDataError);
    std::mt19937_64 gen(1);
    CHECK(sample_covariance(panel_of(testsupport::random_normal(gen, 3, 5))).rank_deficient_possible);
    CHECK_FALSE(sample_covariance(panel_of(testsupport::random_normal(gen, 6, 5))).rank_deficient_possible);
}

TEST_CASE("non-finite rows are dropped listwise") {
    MatrixXd x(4, 2);
    x << 1, 2, std::nan(""), 1, 3, 4, 5, std::numeric_limits<double>::infinity();
    const auto r = ResidualPanel::from_rows(x, {"a", "b"});
    CHECK(r.rows() == 2);
    CHECK(r.values(1, 0) == 3.0);
}

TEST_CASE("sample covariance converges to the Kronecker noise covariance") {
    ScenarioSpec spec = builtin_scenario(4);  // V2 with Sigma1
    Rng rng(99, 0);
    const auto noise = draw_noise(spec, 100000, rng);
    MatrixXd rows(100000, 10);
    for (std::size_t t = 0; t < noise.size(); ++t) {
        rows.row(static_cast<Eigen::Index>(t)) = Eigen::Map<const Eigen::RowVectorXd>(noise[t].data(), 10);
    }
    const auto W = sample_covariance(panel_of(rows)).W;
    CHECK((W - kron(spec.V, spec.Sigma)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("shrinkage matches the scalar-loop oracle") {
    std::mt19937_64 gen(2024);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 2 + rep % 5;
        const int R = 8 + rep % 20;
        const MatrixXd mix = testsupport::random_normal(gen, d, d);
        const MatrixXd x = testsupport::random_normal(gen, R, d) * mix;
        const auto est = shrinkage_covariance(panel_of(x));
        const auto oracle = testsupport::oracle_shrinkage(x);
        REQUIRE(est.lambda.has_value());
        CHECK(std::abs(*est.lambda - oracle.lambda) <= 1e-12);
        CHECK((est.W - oracle.W).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("shrinkage on a 4-column, 12-row panel") {
    std::mt19937_64 gen(12);
    const MatrixXd x = testsupport::random_normal(gen, 12, 4);
    const auto est = shrinkage_covariance(panel_of(x));
    const auto oracle = testsupport::oracle_shrinkage(x);
    CHECK(std::abs(*est.lambda - oracle.lambda) <= 1e-12);
    CHECK((est.W - oracle.W).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("variance of correlations matches the loop oracle") {
    std::mt19937_64 gen(50);
    const MatrixXd x = testsupport::random_normal(gen, 50, 3);
    const auto cv = variance_of_correlations(panel_of(x));
    const int R = 50;
    for (int i = 0; i < 3; ++i) {
        CHECK(cv.r(i, i) == 1.0);
        CHECK(cv.var_r(i, i) == 0.0);
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            double mi = 0, mj = 0, si = 0, sj = 0;
            for (int t = 0; t < R; ++t) mi += x(t, i) / R, mj += x(t, j) / R;
            for (int t = 0; t < R; ++t) si += std::pow(x(t, i) - mi, 2), sj += std::pow(x(t, j) - mj, 2);
            si = std::sqrt(si / (R - 1));
            sj = std::sqrt(sj / (R - 1));
            std::vector<double> w(R);
            double wbar = 0;
            for (int t = 0; t < R; ++t) {
                w[t] = (x(t, i) - mi) / si * (x(t, j) - mj) / sj;
                wbar += w[t] / R;
            }
            double ss = 0;
            for (int t = 0; t < R; ++t) ss += (w[t] - wbar) * (w[t] - wbar);
            CHECK(std::abs(cv.r(i, j) - R / (R - 1.0) * wbar) <= 1e-12);
            CHECK(std::abs(cv.var_r(i, j) - R / std::pow(R - 1.0, 3) * ss) <= 1e-12);
        }
    }
}

TEST_CASE("perfectly correlated columns with constant magnitude") {
    // z_i z_j is constant only when |z| is; then every cross product equals the mean.
    MatrixXd x(6, 2);
    x << 1, 2, -1, -2, 1, 2, -1, -2, 1, 2, -1, -2;
    const auto cv = variance_of_correlations(panel_of(x));
    CHECK(cv.r(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cv.var_r(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("zero-variance column is named") {
    MatrixXd x(5, 2);
    x << 1, 3, 2, 3, 3, 3, 4, 3, 5, 3;
    try {
        (void)shrinkage_covariance(ResidualPanel::from_rows(x, {"A:x", "B:x"}));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("B:x") != std::string::npos);
    }
    CHECK_THROWS_AS(shrinkage_covariance(panel_of(MatrixXd::Identity(2, 2))), InsufficientDataError);
}

TEST_CASE("diagonal sample covariance is a fixed point of shrinkage") {
    MatrixXd x(4, 2);
    x << 1, 1, -1, 1, 1, -1, -1, -1;
    const auto sample = sample_covariance(panel_of(x));
    REQUIRE(sample.W(0, 1) == 0.0);
    const auto shrunk = shrinkage_covariance(panel_of(x));
    CHECK(shrunk.W == sample.W);
    CHECK(*shrunk.lambda == 1.0);  // every r_ij is zero, so the intensity is unbounded
}

TEST_CASE("intensity above one is clamped and W becomes diagonal") {
    // Four rows of weakly related noise: the variance of r dominates r^2.
    MatrixXd x(4, 3);
    x << -0.2, -1.0, -0.9, -0.2, -0.5, 0.9, 1.1, 0.0, 0.5, -1.3, 0.6, 0.0;
    const auto cv = variance_of_correlations(panel_of(x));
    REQUIRE(raw_shrinkage_intensity(cv) > 1.0);
    const auto est = shrinkage_covariance(panel_of(x));
    CHECK(*est.lambda == 1.0);
    CHECK(est.W.isDiagonal(0.0));
}

TEST_CASE("shrinkage invariants on random panels") {
    std::mt19937_64 gen(77);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 2 + rep % 6;
        const MatrixXd x = testsupport::random_normal(gen, 5 + rep % 30, d) * testsupport::random_normal(gen, d, d);
        const auto sample = sample_covariance(panel_of(x));
        const auto est = shrinkage_covariance(panel_of(x));
        CHECK(*est.lambda >= 0.0);
        CHECK(*est.lambda <= 1.0);
        CHECK(est.W.diagonal() == sample.W.diagonal());
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (i != j) CHECK(std::abs(est.W(i, j)) <= std::abs(sample.W(i, j)));
            }
        }
        CHECK(est.W == est.W.transpose());
        if (*est.lambda > 0.0) CHECK(Eigen::LLT<MatrixXd>(est.W).info() == Eigen::Success);
        const auto zero = shrinkage_covariance(panel_of(x), 0.0);
        CHECK((zero.W - sample.W).cwiseAbs().maxCoeff() <= 1e-14);
    }
    CHECK_THROWS_AS(shrinkage_covariance(panel_of(MatrixXd::Random(5, 2)), 1.5), ArgumentError);
}

TEST_CASE("estimator dispatch and names") {
    CHECK(parse_covariance_kind("shrinkage") == CovarianceKind::Shrinkage);
    CHECK(parse_covariance_kind("sample") == CovarianceKind::Sample);
    CHECK(parse_covariance_kind("identity") == CovarianceKind::Identity);
    CHECK(to_string(CovarianceKind::Diagonal) == "diagonal");
    CHECK_THROWS_AS(parse_covariance_kind("ledoit"), ArgumentError);
    const auto id = estimate_covariance(CovarianceKind::Identity, panel_of(MatrixXd::Zero(1, 3)));
    CHECK(id.W == MatrixXd::Identity(3, 3));
}
