#include "sparsevar/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "sparsevar/error.hpp"
#include "sparsevar/parallel.hpp"

namespace sparsevar {

namespace {

constexpr double kMinSigma = 1e-12;

void require_centered(const Vector& v) {
    if (v.size() == 0) throw ConfigError("residual vector is empty");
    const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
    if (std::abs(v.mean()) >= 1e-10 * scale)
        throw ConfigError("bootstrap residuals must be centered (mean " + std::to_string(v.mean()) + ")");
}

}  // namespace

Vector center(const Vector& residuals) { return residuals.array() - residuals.mean(); }

Vector residual_resample(const Vector& centered_residuals, Rng& rng) {
    require_centered(centered_residuals);
    const auto n = centered_residuals.size();
    std::uniform_int_distribution<Index> pick(0, n - 1);
    Vector out(n);
    for (Index t = 0; t < n; ++t) out[t] = centered_residuals[pick(rng)];
    return out;
}

Vector residual_resample(const Vector& centered_residuals, std::uint64_t seed) {
    Rng rng(mix_seed(seed));
    return residual_resample(centered_residuals, rng);
}

Vector wild_resample(const Vector& centered_residuals, MultiplierLaw law, Rng& rng) {
    require_centered(centered_residuals);
    const auto n = centered_residuals.size();
    Vector w(n);
    if (law == MultiplierLaw::standard_normal) {
        std::normal_distribution<double> normal;
        for (Index t = 0; t < n; ++t) w[t] = normal(rng);
    } else {
        std::bernoulli_distribution coin;
        for (Index t = 0; t < n; ++t) w[t] = coin(rng) ? 1.0 : -1.0;
    }
    return centered_residuals.cwiseProduct(w);
}

Vector wild_resample(const Vector& centered_residuals, MultiplierLaw law, std::uint64_t seed) {
    Rng rng(mix_seed(seed));
    return wild_resample(centered_residuals, law, rng);
}

Vector wild_resample(const Vector& centered_residuals, const Vector& multipliers) {
    require_centered(centered_residuals);
    if (multipliers.size() != centered_residuals.size()) throw ConfigError("multiplier length mismatch");
    return centered_residuals.cwiseProduct(multipliers);
}

double empirical_quantile(std::span<const double> sample, double q, QuantileRule rule) {
    if (sample.empty()) throw ConfigError("quantile of an empty sample");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const auto b = static_cast<double>(s.size());
    if (rule == QuantileRule::order_statistic) {
        // Guard against q * B landing a hair above an integer.
        auto rank = static_cast<std::size_t>(std::ceil(q * b - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, s.size());
        return s[rank - 1];
    }
    const double h = (b + 1.0) * q;
    if (h <= 1.0) return s.front();
    if (h >= b) return s.back();
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    return s[lo - 1] + frac * (s[lo] - s[lo - 1]);
}

double bootstrap_lambda(double original_lambda, Index p, LambdaStarRule rule) {
    if (rule == LambdaStarRule::same_as_original) return original_lambda;
    return original_lambda * std::sqrt(std::log(static_cast<double>(std::max<Index>(p, 3))));
}

PivotSample bootstrap_pivots(const PreparedDesign& design, const PrecisionEstimate& precision,
                             const EquationInference& original, const BootstrapConfig& config) {
    const Index n = design.n();
    const Index p = design.p();
    if (config.replications < 2) throw ConfigError("bootstrap needs at least 2 replications");
    if (precision.n() != n || precision.p() != p)
        throw ConfigError("precision estimate was built on a different design");
    if (original.method != IntervalMethod::normal)
        throw ConfigError("bootstrap must start from normal-method inference");
    if (original.lasso.residuals.size() != n || original.debiased.size() != p)
        throw ConfigError("original inference does not match the design");

    const Vector centered = center(original.lasso.residuals);
    const Vector& generator =
        config.response_center == ResponseCenter::debiased ? original.debiased : original.lasso.coefficients;
    const Vector base = design.X() * generator;
    const double lambda_star = bootstrap_lambda(original.lasso.lambda, p, config.lambda_star_rule);
    const Vector scale = precision.z_dot_x.cwiseAbs().cwiseQuotient(precision.z_norm);
    const auto B = static_cast<std::size_t>(config.replications);

    std::vector<std::optional<Vector>> rows(B);
    parallel_for(B, config.threads, [&](std::size_t b) {
        Rng rng = make_rng(config.seed, b);
        const Vector noise = config.scheme == BootstrapScheme::residual
                                 ? residual_resample(centered, rng)
                                 : wild_resample(centered, config.multiplier_law, rng);
        const Vector y_star = base + noise;
        LassoFit fit = design.fit(y_star, lambda_star, &original.lasso.coefficients, kNoExclusion, config.solver);
        if (fit.active_count() >= n) return;
        const double sigma = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(n - fit.active_count()));
        if (sigma < kMinSigma) return;
        const Vector estimate = debias_estimate(fit, precision);
        const Vector* centre = &generator;
        if (config.pivot_center == PivotCenter::original_lasso) centre = &original.lasso.coefficients;
        if (config.pivot_center == PivotCenter::bootstrap_lasso) centre = &fit.coefficients;
        rows[b] = (estimate - *centre).cwiseProduct(scale) / sigma;
    });

    PivotSample out;
    out.requested = config.replications;
    out.precision = &precision;
    for (const auto& r : rows)
        if (!r) ++out.skipped;
    if (static_cast<double>(out.skipped) > config.max_skip_fraction * static_cast<double>(B) ||
        out.skipped == config.replications)
        throw DegenerateError("bootstrap diagnostics: " + std::to_string(out.skipped) + " of " +
                              std::to_string(B) + " replicates skipped (no degrees of freedom or zero residuals)");
    out.pivots.resize(static_cast<Index>(B) - out.skipped, p);
    Index row = 0;
    for (const auto& r : rows)
        if (r) out.pivots.row(row++) = r->transpose();
    return out;
}

EquationInference bootstrap_equation(const PreparedDesign& design, const PrecisionEstimate& precision,
                                     const EquationInference& original, const BootstrapConfig& config, double alpha,
                                     PivotSample* pivots_out) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    PivotSample sample = bootstrap_pivots(design, precision, original, config);

    EquationInference out = original;
    out.alpha = alpha;
    out.method = config.scheme == BootstrapScheme::residual ? IntervalMethod::residual_bootstrap
                                                           : IntervalMethod::wild_bootstrap;
    const Index p = original.debiased.size();
    std::vector<double> column(static_cast<std::size_t>(sample.pivots.rows()));
    for (Index j = 0; j < p; ++j) {
        for (Index b = 0; b < sample.pivots.rows(); ++b) column[static_cast<std::size_t>(b)] = sample.pivots(b, j);
        const double q_hi = empirical_quantile(column, 1.0 - alpha / 2.0, config.quantile_rule);
        const double q_lo = empirical_quantile(column, alpha / 2.0, config.quantile_rule);
        out.lower[j] = original.debiased[j] - q_hi * original.standard_errors[j];
        out.upper[j] = original.debiased[j] - q_lo * original.standard_errors[j];
    }
    if (pivots_out) *pivots_out = std::move(sample);
    return out;
}

}  // namespace sparsevar
