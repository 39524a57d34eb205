#include "sparsevar/debias.hpp"

#include <cmath>
#include <string>

#include "sparsevar/error.hpp"
#include "sparsevar/stats.hpp"

namespace sparsevar {

namespace {

constexpr double kMinSigma = 1e-12;

[[noreturn]] void rethrow_for_equation(Index equation) {
    const std::string prefix = "equation " + std::to_string(equation) + ": ";
    try {
        throw;
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(prefix + e.what(), e.kkt_violation());
    } catch (const DegenerateError& e) {
        throw DegenerateError(prefix + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    }
}

}  // namespace

std::string_view to_string(IntervalMethod method) {
    switch (method) {
        case IntervalMethod::normal: return "normal";
        case IntervalMethod::residual_bootstrap: return "residual_bootstrap";
        case IntervalMethod::wild_bootstrap: return "wild_bootstrap";
    }
    return "unknown";
}

Vector debias_estimate(const LassoFit& lasso, const PrecisionEstimate& precision) {
    if (lasso.coefficients.size() != precision.p())
        throw ConfigError("lasso coefficient length does not match precision dimension");
    if (lasso.residuals.size() != precision.n())
        throw ConfigError("lasso residual length does not match precision rows");
    Vector correction = precision.node_residuals.transpose() * lasso.residuals;
    correction.array() /= static_cast<double>(precision.n()) * precision.tau_sq.array();
    return lasso.coefficients + correction;
}

double sigma_hat(const LassoFit& lasso, Index n) {
    if (lasso.active_count() >= n)
        throw DegenerateError("no residual degrees of freedom: active set " + std::to_string(lasso.active_count()) +
                              " >= n = " + std::to_string(n));
    return std::sqrt(lasso.residuals.squaredNorm() / static_cast<double>(n - lasso.active_count()));
}

Vector standard_errors(double sigma, const PrecisionEstimate& precision) {
    return sigma * precision.z_norm.cwiseQuotient(precision.z_dot_x.cwiseAbs());
}

std::pair<Vector, Vector> normal_ci(const Vector& debiased, const Vector& standard_errors, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (debiased.size() != standard_errors.size()) throw ConfigError("estimate and standard-error lengths differ");
    const double z_hi = stats::normal_quantile(1.0 - alpha / 2.0);
    const double z_lo = stats::normal_quantile(alpha / 2.0);
    return {debiased - z_hi * standard_errors, debiased - z_lo * standard_errors};
}

EquationInference infer_equation(const PreparedDesign& design, const PrecisionEstimate& precision,
                                 const Vector& response, Index equation, double alpha, const LambdaSpec& lambda,
                                 std::uint64_t seed, const SolverOptions& solver) {
    if (precision.n() != design.n() || precision.p() != design.p())
        throw ConfigError("precision estimate was built on a different design");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    try {
        EquationInference out;
        out.equation = equation;
        out.alpha = alpha;
        out.method = IntervalMethod::normal;
        const double penalty = select_lambda(design, response, lambda, seed, kNoExclusion, solver);
        out.lasso = design.fit(response, penalty, nullptr, kNoExclusion, solver);
        out.debiased = debias_estimate(out.lasso, precision);
        out.sigma_hat = sigma_hat(out.lasso, design.n());
        if (out.sigma_hat < kMinSigma) throw DegenerateError("residual standard deviation vanished");
        out.standard_errors = standard_errors(out.sigma_hat, precision);
        std::tie(out.lower, out.upper) = normal_ci(out.debiased, out.standard_errors, alpha);
        return out;
    } catch (const Error&) {
        rethrow_for_equation(equation);
    }
}

}  // namespace sparsevar
