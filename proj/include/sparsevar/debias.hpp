#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "sparsevar/linmodel.hpp"
#include "sparsevar/precision.hpp"

namespace sparsevar {

enum class IntervalMethod { normal, residual_bootstrap, wild_bootstrap };

std::string_view to_string(IntervalMethod method);

/// Inference for one row of the transition matrix (one VAR equation).
struct EquationInference {
    Index equation = 0;
    LassoFit lasso;
    Vector debiased;
    double sigma_hat = 0.0;
    Vector standard_errors;
    Vector lower;
    Vector upper;
    double alpha = 0.05;
    IntervalMethod method = IntervalMethod::normal;

    const Vector& lasso_coefficients() const { return lasso.coefficients; }
};

/// De-biased estimate a + Theta X^T r / n, evaluated through the nodewise
/// residuals: entry j adds Z_j^T r / (n tau_j^2).
Vector debias_estimate(const LassoFit& lasso, const PrecisionEstimate& precision);

/// sqrt(|r|^2 / (n - s)) with s the Lasso active-set size.
double sigma_hat(const LassoFit& lasso, Index n);

/// sigma |Z_j|_2 / |Z_j^T X_j| for every column.
Vector standard_errors(double sigma, const PrecisionEstimate& precision);

/// Two-sided normal interval at miscoverage `alpha`.
std::pair<Vector, Vector> normal_ci(const Vector& debiased, const Vector& standard_errors, double alpha);

/// Lasso fit (penalty from `lambda`), de-biasing, variance estimate and
/// normal intervals for regressing `response` on the shared design.
EquationInference infer_equation(const PreparedDesign& design, const PrecisionEstimate& precision,
                                 const Vector& response, Index equation, double alpha, const LambdaSpec& lambda,
                                 std::uint64_t seed, const SolverOptions& solver = {});

}  // namespace sparsevar
