#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sparsevar/debias.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

enum class BootstrapScheme { residual, wild };
enum class MultiplierLaw { standard_normal, rademacher };
enum class LambdaStarRule {
    same_as_original,
    /// lambda * sqrt(log p), moving the penalty from the sqrt(log p / n)
    /// rate to log p / sqrt(n).
    rescaled,
};

/// Coefficient vector used to regenerate bootstrap responses Y* = X b + e*.
enum class ResponseCenter { debiased, lasso };

/// Centering of the bootstrap pivot (b* - c) / se*.
enum class PivotCenter {
    /// c = the coefficient vector that generated Y* (see ResponseCenter).
    response,
    /// c = original Lasso estimate.
    original_lasso,
    /// c = the replicate's own Lasso estimate.
    bootstrap_lasso,
};

enum class QuantileRule {
    /// Order statistic at ceil(q B), 1-based.
    order_statistic,
    /// Linear interpolation at position (B + 1) q, clamped to the sample range.
    interpolated,
};

struct BootstrapConfig {
    BootstrapScheme scheme = BootstrapScheme::residual;
    int replications = 500;
    MultiplierLaw multiplier_law = MultiplierLaw::standard_normal;
    LambdaStarRule lambda_star_rule = LambdaStarRule::same_as_original;
    ResponseCenter response_center = ResponseCenter::lasso;
    PivotCenter pivot_center = PivotCenter::response;
    QuantileRule quantile_rule = QuantileRule::order_statistic;
    std::uint64_t seed = 0;
    int threads = 1;
    /// Largest tolerated fraction of replicates dropped for ŝ* >= n or a
    /// vanishing residual scale.
    double max_skip_fraction = 0.01;
    SolverOptions solver;
};

/// Pivots of the replicates that were kept (rows) by column.
struct PivotSample {
    Matrix pivots;
    int skipped = 0;
    int requested = 0;
    /// Identity of the precision estimate used in every replicate.
    const PrecisionEstimate* precision = nullptr;
};

/// Draws n values with replacement from the (already centered) residuals.
Vector residual_resample(const Vector& centered_residuals, Rng& rng);
Vector residual_resample(const Vector& centered_residuals, std::uint64_t seed);

/// Multiplies centered residuals by fresh i.i.d. multipliers.
Vector wild_resample(const Vector& centered_residuals, MultiplierLaw law, Rng& rng);
Vector wild_resample(const Vector& centered_residuals, MultiplierLaw law, std::uint64_t seed);
/// Deterministic variant with caller-supplied multipliers.
Vector wild_resample(const Vector& centered_residuals, const Vector& multipliers);

/// Residuals minus their mean.
Vector center(const Vector& residuals);

/// Sample quantile under `rule`; see QuantileRule.
double empirical_quantile(std::span<const double> sample, double q,
                          QuantileRule rule = QuantileRule::order_statistic);

/// Bootstrap penalty implied by `rule`.
double bootstrap_lambda(double original_lambda, Index p, LambdaStarRule rule);

/// Runs the B bootstrap replicates for one equation around `original`
/// (normal-method inference from infer_equation) and returns the pivots.
PivotSample bootstrap_pivots(const PreparedDesign& design, const PrecisionEstimate& precision,
                             const EquationInference& original, const BootstrapConfig& config);

/// Bootstrap confidence intervals: l_j = a_j - q_{1-alpha/2} se_j and
/// u_j = a_j - q_{alpha/2} se_j with q from column j of the pivot sample.
EquationInference bootstrap_equation(const PreparedDesign& design, const PrecisionEstimate& precision,
                                     const EquationInference& original, const BootstrapConfig& config, double alpha,
                                     PivotSample* pivots_out = nullptr);

}  // namespace sparsevar
