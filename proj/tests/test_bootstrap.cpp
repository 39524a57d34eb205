#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "sparsevar/bootstrap.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/stats.hpp"

using namespace sparsevar;

namespace {

struct Fixture {
    oracle::VarSample sample;
    PreparedDesign design;
    PrecisionEstimate precision;
    EquationInference original;

    Fixture(Index n, Index p, std::uint64_t seed)
        : sample(oracle::var_sample(n, p, 3, seed)),
          design(sample.panel.X),
          precision(nodewise_lasso(design, NodewiseOptions{}, seed)),
          original(infer_equation(design, precision, sample.panel.Y.col(0), 0, 0.05, LambdaSpec::cross_validated(),
                                  seed)) {}
};

}  // namespace

TEST_CASE("centering") {
    const Vector r = Vector::LinSpaced(7, 1.0, 4.0);
    const Vector c = center(r);
    CHECK(std::abs(c.mean()) <= 1e-15);
    CHECK((r - c).isConstant(r.mean(), 1e-14));
    CHECK_THROWS_AS(residual_resample(r, 1), ConfigError);
    CHECK_THROWS_AS(wild_resample(r, MultiplierLaw::rademacher, 1), ConfigError);
    CHECK_THROWS_AS(residual_resample(Vector(), 1), ConfigError);
}

TEST_CASE("residual resampling") {
    CHECK(residual_resample(Vector::Zero(6), 3).isZero(0.0));

    Vector pm(2);
    pm << -1.0, 1.0;
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 5000; ++s) {
        const Vector d = residual_resample(pm, s);
        for (Index i = 0; i < 2; ++i) CHECK((d[i] == 1.0 || d[i] == -1.0));
        sum += d.sum();
    }
    CHECK(std::abs(sum / 10000.0) <= 0.03);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    Vector r(50);
    for (Index i = 0; i < 50; ++i) r[i] = z(rng) * (1.0 + 0.1 * i);
    const Vector c = center(r);
    const double target = c.squaredNorm() / 50.0;
    Rng draw(11);
    double second = 0.0;
    const int reps = 200;  // 10,000 draws
    for (int k = 0; k < reps; ++k) second += residual_resample(c, draw).squaredNorm();
    CHECK(second / (reps * 50.0) == doctest::Approx(target).epsilon(0.02));

    CHECK(residual_resample(c, 99) == residual_resample(c, 99));
    CHECK(residual_resample(c, 99) != residual_resample(c, 100));
}

TEST_CASE("wild resampling") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    Vector r(10000);
    for (Index i = 0; i < r.size(); ++i) r[i] = z(rng) + 0.01;
    const Vector c = center(r);
    CHECK(wild_resample(c, Vector::Ones(c.size())) == c);

    const Vector rad = wild_resample(c, MultiplierLaw::rademacher, 5);
    CHECK(rad.cwiseAbs() == c.cwiseAbs());

    const Vector g = wild_resample(c, MultiplierLaw::standard_normal, 6);
    const Vector w = g.cwiseQuotient(c);
    const double var = (w.array() - w.mean()).square().sum() / static_cast<double>(w.size() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(0.03));
    CHECK(std::abs(w.mean()) <= 0.05);

    // Both schemes target the same residual population variance.
    const Vector small = center(Vector::LinSpaced(40, -2.0, 3.0));
    const double target = small.squaredNorm() / 40.0;
    Rng draw(12);
    double wild_second = 0.0;
    for (int k = 0; k < 2500; ++k) wild_second += wild_resample(small, MultiplierLaw::rademacher, draw).squaredNorm();
    CHECK(wild_second / (2500 * 40.0) == doctest::Approx(target).epsilon(1e-12));
    wild_second = 0.0;
    for (int k = 0; k < 2500; ++k)
        wild_second += wild_resample(small, MultiplierLaw::standard_normal, draw).squaredNorm();
    CHECK(wild_second / (2500 * 40.0) == doctest::Approx(target).epsilon(0.03));
    CHECK_THROWS_AS(wild_resample(small, Vector::Ones(3)), ConfigError);
}

TEST_CASE("empirical quantiles") {
    const std::vector<double> four{4.0, 2.0, 1.0, 3.0};
    CHECK(empirical_quantile(four, 0.5) == 2.0);
    CHECK(empirical_quantile(four, 0.25) == 1.0);
    CHECK(empirical_quantile(four, 0.26) == 2.0);
    CHECK(empirical_quantile(four, 0.999) == 4.0);
    const std::vector<double> one{5.0};
    for (double q : {0.01, 0.5, 0.99}) {
        CHECK(empirical_quantile(one, q) == 5.0);
        CHECK(empirical_quantile(one, q, QuantileRule::interpolated) == 5.0);
    }
    const std::vector<double> pivots{-2.0, -1.0, 1.0, 2.0};
    CHECK(empirical_quantile(pivots, 0.25, QuantileRule::interpolated) == doctest::Approx(-1.75).epsilon(1e-15));
    CHECK(empirical_quantile(pivots, 0.75, QuantileRule::interpolated) == doctest::Approx(1.75).epsilon(1e-15));

    std::mt19937_64 rng(21);
    std::normal_distribution<double> z;
    std::vector<double> draws(1000);
    for (double& d : draws) d = z(rng);
    CHECK(std::abs(empirical_quantile(draws, 0.975) - 1.960) <= 0.15);
    CHECK(std::abs(empirical_quantile(draws, 0.975, QuantileRule::interpolated) - 1.960) <= 0.15);

    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), ConfigError);
    CHECK_THROWS_AS(empirical_quantile(four, 0.0), ConfigError);
    CHECK_THROWS_AS(empirical_quantile(four, 1.0), ConfigError);
}

TEST_CASE("bootstrap penalty rule") {
    CHECK(bootstrap_lambda(0.2, 100, LambdaStarRule::same_as_original) == 0.2);
    CHECK(bootstrap_lambda(0.2, 100, LambdaStarRule::rescaled) == doctest::Approx(0.2 * std::sqrt(std::log(100.0))));
}

TEST_CASE("bootstrap intervals come from the pivot quantiles") {
    const Fixture f(120, 15, 31);
    for (BootstrapScheme scheme : {BootstrapScheme::residual, BootstrapScheme::wild}) {
        for (QuantileRule rule : {QuantileRule::order_statistic, QuantileRule::interpolated}) {
            BootstrapConfig config;
            config.scheme = scheme;
            config.replications = 60;
            config.quantile_rule = rule;
            config.seed = 5;
            PivotSample sample;
            const EquationInference boot = bootstrap_equation(f.design, f.precision, f.original, config, 0.1, &sample);
            CHECK(sample.precision == &f.precision);
            CHECK(sample.requested == 60);
            CHECK(sample.pivots.rows() + sample.skipped == 60);
            CHECK(sample.pivots.allFinite());
            CHECK(boot.method == (scheme == BootstrapScheme::residual ? IntervalMethod::residual_bootstrap
                                                                      : IntervalMethod::wild_bootstrap));
            CHECK(boot.debiased == f.original.debiased);
            for (Index j = 0; j < 15; ++j) {
                std::vector<double> col(sample.pivots.col(j).data(), sample.pivots.col(j).data() + sample.pivots.rows());
                const double se = f.original.standard_errors[j];
                CHECK(boot.lower[j] == f.original.debiased[j] - empirical_quantile(col, 0.95, rule) * se);
                CHECK(boot.upper[j] == f.original.debiased[j] - empirical_quantile(col, 0.05, rule) * se);
                CHECK(boot.lower[j] <= boot.upper[j]);
            }
        }
    }
}

TEST_CASE("pivots are reproducible and independent of thread count") {
    const Fixture f(100, 12, 41);
    BootstrapConfig config;
    config.replications = 40;
    config.seed = 17;
    const PivotSample a = bootstrap_pivots(f.design, f.precision, f.original, config);
    config.threads = 4;
    const PivotSample b = bootstrap_pivots(f.design, f.precision, f.original, config);
    CHECK(a.pivots == b.pivots);
    config.seed = 18;
    const PivotSample c = bootstrap_pivots(f.design, f.precision, f.original, config);
    CHECK(a.pivots != c.pivots);
}

TEST_CASE("pivot centering variants") {
    const Fixture f(100, 10, 51);
    BootstrapConfig config;
    config.replications = 30;
    config.seed = 3;
    const Vector scale = f.precision.z_dot_x.cwiseAbs().cwiseQuotient(f.precision.z_norm);
    config.pivot_center = PivotCenter::response;
    const PivotSample base = bootstrap_pivots(f.design, f.precision, f.original, config);
    config.pivot_center = PivotCenter::original_lasso;
    const PivotSample same = bootstrap_pivots(f.design, f.precision, f.original, config);
    // With the Lasso fit as the response generator both centers coincide.
    CHECK(base.pivots == same.pivots);

    config.response_center = ResponseCenter::debiased;
    config.pivot_center = PivotCenter::response;
    const PivotSample deb = bootstrap_pivots(f.design, f.precision, f.original, config);
    config.pivot_center = PivotCenter::original_lasso;
    const PivotSample deb_lasso = bootstrap_pivots(f.design, f.precision, f.original, config);
    // Same replicates, centers differ by (debiased - lasso) scaled by se*.
    REQUIRE(deb.pivots.rows() == deb_lasso.pivots.rows());
    for (Index b = 0; b < deb.pivots.rows(); ++b) {
        const Vector d = (deb_lasso.pivots.row(b) - deb.pivots.row(b)).transpose();
        const Vector shift = (f.original.debiased - f.original.lasso.coefficients).cwiseProduct(scale);
        const double ratio = d.dot(shift) / shift.squaredNorm();
        CHECK((d - ratio * shift).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + d.lpNorm<Eigen::Infinity>()));
        CHECK(ratio > 0.0);
    }
}

TEST_CASE("zero residuals trip the degenerate guard") {
    const auto sample = oracle::var_sample(60, 5, 2, 61);
    const PreparedDesign design(sample.panel.X);
    NodewiseOptions opts;
    opts.lambda = LambdaSpec::fixed_value(0.05);
    const PrecisionEstimate prec = nodewise_lasso(design, opts, 1);
    const Vector b = Vector::LinSpaced(5, -0.3, 0.3);
    const Vector y = sample.panel.X * b;
    EquationInference original;
    original.lasso = lasso_fit(DesignProblem(sample.panel.X, y), 0.0);
    original.lasso.residuals.setZero();
    original.debiased = debias_estimate(original.lasso, prec);
    original.sigma_hat = 0.0;
    original.standard_errors = Vector::Zero(5);
    original.lower = original.upper = original.debiased;
    BootstrapConfig config;
    config.replications = 10;
    CHECK_THROWS_AS(bootstrap_equation(design, prec, original, config, 0.05), DegenerateError);
    config.replications = 1;
    CHECK_THROWS_AS(bootstrap_pivots(design, prec, original, config), ConfigError);
}

TEST_CASE("bootstrap pivots are roughly standardized") {
    const Fixture f(300, 50, 71);
    BootstrapConfig config;
    config.replications = 400;
    config.seed = 9;
    const PivotSample sample = bootstrap_pivots(f.design, f.precision, f.original, config);
    std::vector<double> sds, shifts;
    for (Index j = 0; j < 50; ++j) {
        const double m = sample.pivots.col(j).mean();
        sds.push_back(std::sqrt((sample.pivots.col(j).array() - m).square().mean()));
        if (f.sample.A(0, j) == 0.0) shifts.push_back(std::abs(m));
    }
    std::sort(sds.begin(), sds.end());
    std::sort(shifts.begin(), shifts.end());
    MESSAGE("median pivot sd " << sds[25] << ", median |mean| on zero entries " << shifts[shifts.size() / 2]);
    CHECK(std::abs(sds[25] - 1.0) <= 0.1);
    CHECK(shifts[shifts.size() / 2] <= 0.25);
}

TEST_CASE("every fit in this binary was certified") {
    const FitAudit audit = fit_audit();
    CHECK(audit.fits > 0);
    CHECK(audit.worst_kkt <= 1e-7);
}
