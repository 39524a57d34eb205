#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sparsevar/linmodel.hpp"

namespace sparsevar {

/// How a penalty is chosen for one regression: a fixed value, or K-fold
/// cross-validation over a geometric path below that regression's lambda_max.
struct LambdaSpec {
    std::optional<double> fixed;
    int folds = 10;
    int path_count = LambdaPath::kDefaultCount;
    double path_ratio = LambdaPath::kDefaultRatio;

    static LambdaSpec cross_validated(int folds = 10) {
        LambdaSpec s;
        s.folds = folds;
        return s;
    }
    static LambdaSpec fixed_value(double lambda) {
        LambdaSpec s;
        s.fixed = lambda;
        return s;
    }
};

/// Penalty for regressing `y` on the prepared design (excluding one column
/// when running a nodewise regression).
double select_lambda(const PreparedDesign& design, const Vector& y, const LambdaSpec& spec, std::uint64_t seed,
                     Index excluded = kNoExclusion, const SolverOptions& options = {});

struct NodewiseOptions {
    LambdaSpec lambda = LambdaSpec::cross_validated();
    /// When non-empty, one penalty per column; overrides `lambda`.
    std::vector<double> per_column;
    int threads = 1;
    SolverOptions solver;
};

/// Nodewise-Lasso relaxed inverse of the sample Gram matrix.
///
/// Row j of gamma holds the coefficients of column j regressed on the other
/// columns (gamma(j, j) = 0). Column j of node_residuals is
/// Z_j = X_j - X_{-j} gamma_j, and tau_sq[j] = |Z_j|^2 / n + lambda_j |gamma_j|_1.
/// Theta = T^{-2} C is materialized only on request; downstream code uses Z
/// and tau_sq directly.
struct PrecisionEstimate {
    Matrix gamma;
    Matrix node_residuals;
    Vector tau_sq;
    Vector node_lambdas;
    /// Z_j^T X_j and |Z_j|_2, cached for standard errors.
    Vector z_dot_x;
    Vector z_norm;
    std::uint64_t design_hash = 0;

    Index n() const { return node_residuals.rows(); }
    Index p() const { return node_residuals.cols(); }

    Vector theta_row(Index j) const;
    Matrix theta() const;
};

PrecisionEstimate nodewise_lasso(const PreparedDesign& design, const NodewiseOptions& options, std::uint64_t seed);
PrecisionEstimate nodewise_lasso(const Matrix& X, const NodewiseOptions& options, std::uint64_t seed);

/// max over j, k != j of |(Theta Sigma_hat - I)_{jk}|.
double relaxed_inverse_check(const PrecisionEstimate& estimate, const Eigen::Ref<const Matrix>& X);

/// Per-row bound lambda_j / tau_j^2 on the off-diagonal entries above.
Vector relaxed_inverse_bounds(const PrecisionEstimate& estimate);

/// Number of nodewise regressions run in this process so far.
std::uint64_t nodewise_regression_count();

/// FNV-1a over the dimensions and raw bytes of X.
std::uint64_t content_hash(const Eigen::Ref<const Matrix>& X);

/// Cache key combining the design hash with everything that changes the
/// estimate (penalty rule and seed).
std::uint64_t precision_cache_key(std::uint64_t design_hash, const NodewiseOptions& options, std::uint64_t seed);

void save_precision(const PrecisionEstimate& estimate, std::uint64_t key, const std::filesystem::path& path);

/// Returns the stored estimate when the file exists and carries `key`.
std::optional<PrecisionEstimate> load_precision(const std::filesystem::path& path, std::uint64_t key);

}  // namespace sparsevar
