#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/precision.hpp"

using namespace sparsevar;

namespace {

// Every estimate built here goes through the same identity checks.
void check_identities(const PrecisionEstimate& est, const Matrix& X) {
    const double n = static_cast<double>(X.rows());
    const Matrix sigma = X.transpose() * X / n;
    const Matrix theta = est.theta();
    const Matrix product = theta * sigma;
    for (Index j = 0; j < est.p(); ++j) {
        CHECK(est.tau_sq[j] > 0.0);
        CHECK(est.gamma(j, j) == 0.0);
        const Vector z = X.col(j) - X * est.gamma.row(j).transpose();
        CHECK((z - est.node_residuals.col(j)).lpNorm<Eigen::Infinity>() <= 1e-10);
        CHECK(est.tau_sq[j] ==
              doctest::Approx(z.squaredNorm() / n + est.node_lambdas[j] * est.gamma.row(j).lpNorm<1>()).epsilon(1e-12));
        CHECK(std::abs(z.dot(X.col(j)) / n - est.tau_sq[j]) <= 1e-7);
        CHECK(std::abs(product(j, j) - 1.0) <= 1e-7);
        double off = 0.0;
        for (Index k = 0; k < est.p(); ++k)
            if (k != j) off = std::max(off, std::abs(product(j, k)));
        CHECK(off <= est.node_lambdas[j] / est.tau_sq[j] + 1e-7);
        CHECK((est.theta_row(j) - theta.row(j).transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

Matrix correlated(Index n, const Matrix& cov, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    const Matrix L = cov.llt().matrixL();
    Matrix X(n, cov.rows());
    for (Index i = 0; i < n; ++i) {
        Vector e(cov.rows());
        for (Index k = 0; k < e.size(); ++k) e[k] = z(rng);
        X.row(i) = (L * e).transpose();
    }
    return X;
}

}  // namespace

TEST_CASE("orthogonal columns give trivial nodewise regressions") {
    Matrix X = Matrix::Zero(8, 4);
    // Columns with disjoint supports are exactly orthogonal.
    X(0, 0) = 1.0, X(1, 0) = -2.0;
    X(2, 1) = 3.0, X(3, 1) = 0.5;
    X(4, 2) = -1.0, X(5, 2) = 1.0;
    X(6, 3) = 2.0, X(7, 3) = 2.0;
    for (double lambda : {0.0, 0.1}) {
        NodewiseOptions opts;
        opts.lambda = LambdaSpec::fixed_value(lambda);
        const PrecisionEstimate est = nodewise_lasso(X, opts, 1);
        CHECK(est.gamma.isZero(0.0));
        CHECK((est.node_residuals - X).isZero(0.0));
        for (Index j = 0; j < 4; ++j) CHECK(est.tau_sq[j] == doctest::Approx(X.col(j).squaredNorm() / 8.0));
        CHECK(relaxed_inverse_check(est, X) <= 1e-12);
        check_identities(est, X);
    }
}

TEST_CASE("zero penalty recovers the inverse Gram matrix") {
    Matrix cov(3, 3);
    cov << 1.0, 0.5, 0.2, 0.5, 1.0, 0.3, 0.2, 0.3, 1.0;
    const Matrix X = correlated(2000, cov, 7);
    NodewiseOptions opts;
    opts.lambda = LambdaSpec::fixed_value(0.0);
    const PrecisionEstimate est = nodewise_lasso(X, opts, 1);
    const Matrix direct = (X.transpose() * X / 2000.0).inverse();
    CHECK((est.theta() - direct).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK(relaxed_inverse_check(est, X) <= 1e-7);
    check_identities(est, X);
}

TEST_CASE("cross-validated nodewise pass on a VAR design") {
    const auto sample = oracle::var_sample(100, 50, 5, 11);
    const Matrix& X = sample.panel.X;
    NodewiseOptions opts;
    const PrecisionEstimate est = nodewise_lasso(X, opts, 3);
    check_identities(est, X);

    const Matrix gap = est.theta() * (X.transpose() * X / 100.0) - Matrix::Identity(50, 50);
    double brute = 0.0;
    for (Index j = 0; j < 50; ++j)
        for (Index k = 0; k < 50; ++k)
            if (j != k) brute = std::max(brute, std::abs(gap(j, k)));
    CHECK(relaxed_inverse_check(est, X) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(brute <= relaxed_inverse_bounds(est).maxCoeff() + 1e-7);
    CHECK(est.design_hash == content_hash(X));
    for (Index j = 0; j < 50; ++j) {
        CHECK(est.z_norm[j] == doctest::Approx(est.node_residuals.col(j).norm()).epsilon(1e-12));
        CHECK(est.z_dot_x[j] == doctest::Approx(est.node_residuals.col(j).dot(X.col(j))).epsilon(1e-12));
    }

    SUBCASE("column order and thread count do not matter") {
        NodewiseOptions many = opts;
        many.threads = 4;
        const PrecisionEstimate again = nodewise_lasso(X, many, 3);
        CHECK(again.gamma == est.gamma);
        CHECK(again.tau_sq == est.tau_sq);

        std::vector<Index> perm(50);
        for (Index k = 0; k < 50; ++k) perm[static_cast<std::size_t>(k)] = 49 - k;
        const Matrix Xp = X(Eigen::all, perm);
        NodewiseOptions fixed;
        fixed.per_column.assign(est.node_lambdas.data(), est.node_lambdas.data() + 50);
        const PrecisionEstimate base = nodewise_lasso(X, fixed, 3);
        std::reverse(fixed.per_column.begin(), fixed.per_column.end());
        const PrecisionEstimate flipped = nodewise_lasso(Xp, fixed, 3);
        for (Index j = 0; j < 50; ++j)
            CHECK(flipped.tau_sq[49 - j] == doctest::Approx(base.tau_sq[j]).epsilon(1e-8));
    }
}

TEST_CASE("regression counter advances by one per column") {
    const auto sample = oracle::var_sample(60, 12, 3, 21);
    const auto before = nodewise_regression_count();
    NodewiseOptions opts;
    opts.lambda = LambdaSpec::fixed_value(0.05);
    nodewise_lasso(sample.panel.X, opts, 1);
    CHECK(nodewise_regression_count() - before == 12);
}

TEST_CASE("degenerate and malformed inputs") {
    Matrix X(10, 3);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    for (Index i = 0; i < 10; ++i)
        for (Index j = 0; j < 3; ++j) X(i, j) = z(rng);
    X.col(2) = X.col(0) - X.col(1);
    NodewiseOptions opts;
    opts.lambda = LambdaSpec::fixed_value(0.0);
    try {
        nodewise_lasso(X, opts, 1);
        FAIL("expected a degenerate-column error");
    } catch (const DegenerateError& e) {
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
    CHECK_THROWS_AS(nodewise_lasso(Matrix::Ones(10, 1), opts, 1), ConfigError);
    opts.per_column = {0.1, 0.1};
    CHECK_THROWS_AS(nodewise_lasso(X, opts, 1), ConfigError);
}

TEST_CASE("cache round trip is keyed on design and options") {
    const auto sample = oracle::var_sample(80, 10, 3, 31);
    NodewiseOptions opts;
    opts.lambda = LambdaSpec::fixed_value(0.05);
    const PrecisionEstimate est = nodewise_lasso(sample.panel.X, opts, 9);
    const auto path = std::filesystem::temp_directory_path() / "sparsevar_precision_test.bin";
    const std::uint64_t key = precision_cache_key(content_hash(sample.panel.X), opts, 9);
    save_precision(est, key, path);
    const auto back = load_precision(path, key);
    REQUIRE(back.has_value());
    CHECK(back->gamma == est.gamma);
    CHECK(back->node_residuals == est.node_residuals);
    CHECK(back->tau_sq == est.tau_sq);
    CHECK(back->node_lambdas == est.node_lambdas);
    CHECK(back->z_dot_x == est.z_dot_x);
    CHECK(back->z_norm == est.z_norm);
    CHECK(back->design_hash == est.design_hash);
    CHECK_FALSE(load_precision(path, key + 1).has_value());
    CHECK(precision_cache_key(content_hash(sample.panel.X), opts, 10) != key);
    NodewiseOptions other = opts;
    other.lambda = LambdaSpec::fixed_value(0.06);
    CHECK(precision_cache_key(content_hash(sample.panel.X), other, 9) != key);
    Matrix X2 = sample.panel.X;
    X2(0, 0) += 1e-12;
    CHECK(content_hash(X2) != content_hash(sample.panel.X));
    std::filesystem::remove(path);
    CHECK_FALSE(load_precision(path, key).has_value());
}

TEST_CASE("every fit in this binary was certified") {
    const FitAudit audit = fit_audit();
    CHECK(audit.fits > 0);
    CHECK(audit.worst_kkt <= 1e-7);
}
