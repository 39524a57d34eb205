#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sparsevar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

inline constexpr Index kNoExclusion = -1;

/// Regression problem y ~ X with no intercept. Holds references; the caller
/// keeps X and y alive for the lifetime of the problem.
struct DesignProblem {
    Eigen::Ref<const Matrix> X;
    Eigen::Ref<const Vector> y;

    DesignProblem(const Eigen::Ref<const Matrix>& X_, const Eigen::Ref<const Vector>& y_) : X(X_), y(y_) {}
    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }
};

/// Coordinate descent controls. Convergence is declared once a full sweep
/// moves no coordinate by more than `update_tol` and the KKT certificate
/// holds at `kkt_tol`.
struct SolverOptions {
    double kkt_tol = 1e-7;
    double update_tol = 1e-9;
    int max_sweeps = 10000;
};

/// Minimizer of ||y - X b||^2 / n + 2 lambda ||b||_1.
struct LassoFit {
    Vector coefficients;
    double lambda = 0.0;
    IndexSet active_set;
    Vector residuals;
    double objective = 0.0;
    double kkt_violation = 0.0;
    int sweeps = 0;

    Index active_count() const { return static_cast<Index>(active_set.size()); }
};

/// Strictly decreasing grid of positive penalties, geometric by default.
struct LambdaPath {
    std::vector<double> values;
    double lambda_max = 0.0;
    double ratio = 0.0;

    static constexpr int kDefaultCount = 100;
    static constexpr double kDefaultRatio = 1e-3;

    std::size_t count() const { return values.size(); }

    static LambdaPath geometric(double lambda_max, int count = kDefaultCount, double ratio = kDefaultRatio);
    /// Validates strict decrease and positivity.
    static LambdaPath from_values(std::vector<double> values);
};

struct CvResult {
    double lambda = 0.0;
    std::size_t index = 0;
    Vector cv_errors;
};

double soft_threshold(double z, double t);

/// ||X^T y / n||_inf, the smallest penalty with an all-zero solution.
double lambda_max(const DesignProblem& problem);

double lasso_objective(const DesignProblem& problem, const Vector& coefficients, double lambda);

/// Largest departure from the Lasso optimality conditions, evaluated in data
/// space from X^T r / n. Coordinates equal to `excluded` are ignored.
double kkt_violation(const Eigen::Ref<const Matrix>& X, const Vector& residuals, const Vector& coefficients,
                     double lambda, Index excluded = kNoExclusion);

LassoFit lasso_fit(const DesignProblem& problem, double lambda, const SolverOptions& options = {});
LassoFit lasso_fit(const DesignProblem& problem, double lambda, const Vector& warm_start,
                   const SolverOptions& options = {});

/// Fits along the path from the largest penalty down, warm-starting each fit.
std::vector<LassoFit> lasso_path(const DesignProblem& problem, const LambdaPath& path,
                                 const SolverOptions& options = {});

/// K-fold cross-validation over `path`. Rows go to folds by a seeded random
/// permutation; ties in the error curve resolve toward the larger penalty.
CvResult cv_select_lambda(const DesignProblem& problem, const LambdaPath& path, int folds, std::uint64_t seed,
                          const SolverOptions& options = {});

/// Process-wide tally of certified fits: full fits from PreparedDesign::fit
/// and the per-fold path fits inside cross-validation, with the largest KKT
/// violation any of them returned with.
struct FitAudit {
    std::uint64_t fits = 0;
    std::uint64_t cv_fits = 0;
    double worst_kkt = 0.0;
};
FitAudit fit_audit();

/// Least squares restricted to `support`, zero elsewhere.
Vector ols_refit(const DesignProblem& problem, const IndexSet& support);

/// Fold label in [0, folds) for each of n rows.
std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed);

/// Design with its Gram matrix X^T X / n precomputed. Every regression that
/// shares X (all VAR equations, all nodewise regressions, all bootstrap
/// replicates) reuses one instance.
class PreparedDesign {
public:
    explicit PreparedDesign(const Eigen::Ref<const Matrix>& X);

    const Eigen::Ref<const Matrix>& X() const { return X_; }
    const Matrix& gram() const { return gram_; }
    Index n() const { return X_.rows(); }
    Index p() const { return X_.cols(); }

    Vector cross(const Vector& y) const;

    /// Lasso of y on X with coordinate `excluded` held at zero. The KKT
    /// certificate is checked in data space before returning.
    LassoFit fit(const Vector& y, double lambda, const Vector* warm_start = nullptr, Index excluded = kNoExclusion,
                 const SolverOptions& options = {}) const;

    /// Mean held-out squared error for each penalty in `lambdas`.
    Vector cv_errors(const Vector& y, std::span<const double> lambdas, int folds, std::uint64_t seed,
                     Index excluded = kNoExclusion, const SolverOptions& options = {}) const;

    double lambda_max(const Vector& y, Index excluded = kNoExclusion) const;

private:
    Eigen::Ref<const Matrix> X_;
    Matrix gram_;
};

namespace gram {

struct DescentResult {
    int sweeps = 0;
    double kkt_violation = 0.0;
    bool converged = false;
};

/// Cholesky factor of the Gram block on a working set, in insertion order,
/// updated one coordinate at a time. Valid for as long as the Gram matrix it
/// was built against is unchanged, so it can be carried along a path.
class ActiveFactor {
public:
    const IndexSet& order() const { return order_; }
    Index size() const { return static_cast<Index>(order_.size()); }
    Index position(Index k) const;

    /// Appends coordinate k. When column k is numerically dependent on the
    /// current set the factor is left unchanged, false is returned and `null`
    /// receives v over order() followed by k with v_k = 1 and G v ~ 0.
    bool insert(const Matrix& gram, Index k, Vector& null);
    void erase(Index position);
    void clear();
    /// Solves G_SS x = rhs with rhs ordered like order().
    Vector solve(const Vector& rhs) const;

private:
    IndexSet order_;
    std::vector<Index> where_;
    Matrix L_;
    int updates_ = 0;
};

/// Covariance-form coordinate descent on (1/n) X^T X = `gram`, (1/n) X^T y =
/// `cross`. Updates `beta` in place. Once the support settles, an exact
/// active-set (feature-sign) step finishes the fit; `factor` may carry its
/// Cholesky factor between calls on the same Gram matrix.
DescentResult coordinate_descent(const Matrix& gram, const Vector& cross, double lambda, Vector& beta,
                                 Index excluded, const SolverOptions& options, ActiveFactor* factor = nullptr);

double kkt_from_gradient(const Vector& gradient, const Vector& beta, double lambda, Index excluded);

}  // namespace gram

}  // namespace sparsevar
