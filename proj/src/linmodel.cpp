#include "sparsevar/linmodel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sparsevar/error.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

namespace {

void require_finite(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Vector>& y) {
    if (!X.allFinite()) throw DataError("design matrix has non-finite entries");
    if (!y.allFinite()) throw DataError("response has non-finite entries");
}

void validate(const DesignProblem& problem) {
    if (problem.n() < 2) throw ConfigError("design needs at least 2 rows");
    if (problem.p() < 1) throw ConfigError("design needs at least 1 column");
    if (problem.y.size() != problem.n())
        throw ConfigError("response length " + std::to_string(problem.y.size()) + " != rows " +
                          std::to_string(problem.n()));
    require_finite(problem.X, problem.y);
}

IndexSet support_of(const Vector& beta) {
    IndexSet s;
    for (Index k = 0; k < beta.size(); ++k)
        if (beta[k] != 0.0) s.push_back(k);
    return s;
}

std::atomic<std::uint64_t> audit_fits{0};
std::atomic<std::uint64_t> audit_cv_fits{0};
std::atomic<double> audit_worst{0.0};

void record_fit(double violation, bool cv) {
    (cv ? audit_cv_fits : audit_fits).fetch_add(1, std::memory_order_relaxed);
    double seen = audit_worst.load(std::memory_order_relaxed);
    while (violation > seen && !audit_worst.compare_exchange_weak(seen, violation, std::memory_order_relaxed)) {
    }
}

}  // namespace

FitAudit fit_audit() {
    return {audit_fits.load(), audit_cv_fits.load(), audit_worst.load()};
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

LambdaPath LambdaPath::geometric(double lambda_max, int count, double ratio) {
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) throw ConfigError("lambda_max must be positive");
    if (count < 1) throw ConfigError("lambda path needs at least one value");
    if (count > 1 && !(ratio > 0.0 && ratio < 1.0)) throw ConfigError("lambda ratio must lie in (0, 1)");
    LambdaPath path;
    path.lambda_max = lambda_max;
    path.ratio = count == 1 ? 1.0 : ratio;
    path.values.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        path.values[static_cast<std::size_t>(k)] = lambda_max * std::pow(ratio, frac);
    }
    path.values.front() = lambda_max;
    return path;
}

LambdaPath LambdaPath::from_values(std::vector<double> values) {
    if (values.empty()) throw ConfigError("lambda path is empty");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!(values[k] > 0.0) || !std::isfinite(values[k])) throw ConfigError("lambda values must be positive");
        if (k > 0 && !(values[k] < values[k - 1])) throw ConfigError("lambda values must strictly decrease");
    }
    LambdaPath path;
    path.lambda_max = values.front();
    path.ratio = values.back() / values.front();
    path.values = std::move(values);
    return path;
}

double lambda_max(const DesignProblem& problem) {
    validate(problem);
    return (problem.X.transpose() * problem.y).cwiseAbs().maxCoeff() / static_cast<double>(problem.n());
}

double lasso_objective(const DesignProblem& problem, const Vector& coefficients, double lambda) {
    Vector r = problem.y - problem.X * coefficients;
    return r.squaredNorm() / static_cast<double>(problem.n()) + 2.0 * lambda * coefficients.lpNorm<1>();
}

double kkt_violation(const Eigen::Ref<const Matrix>& X, const Vector& residuals, const Vector& coefficients,
                     double lambda, Index excluded) {
    Vector gradient = X.transpose() * residuals / static_cast<double>(X.rows());
    return gram::kkt_from_gradient(gradient, coefficients, lambda, excluded);
}

namespace gram {

double kkt_from_gradient(const Vector& gradient, const Vector& beta, double lambda, Index excluded) {
    double worst = 0.0;
    for (Index k = 0; k < beta.size(); ++k) {
        if (k == excluded) continue;
        double v = beta[k] != 0.0 ? std::abs(gradient[k] - lambda * (beta[k] > 0.0 ? 1.0 : -1.0))
                                  : std::max(std::abs(gradient[k]) - lambda, 0.0);
        worst = std::max(worst, v);
    }
    return worst;
}

Index ActiveFactor::position(Index k) const {
    if (k < 0 || k >= static_cast<Index>(where_.size())) return -1;
    return where_[static_cast<std::size_t>(k)];
}

void ActiveFactor::clear() {
    order_.clear();
    std::fill(where_.begin(), where_.end(), Index{-1});
    updates_ = 0;
}

bool ActiveFactor::insert(const Matrix& gram, Index k, Vector& null) {
    const Index p = gram.rows();
    if (L_.rows() != p) {
        L_.setZero(p, p);
        where_.assign(static_cast<std::size_t>(p), -1);
        order_.clear();
    }
    if (++updates_ > 8 * p + 64) {
        // Rebuild occasionally so rounding from many updates cannot pile up.
        const IndexSet keep = order_;
        clear();
        Vector unused;
        for (Index j : keep) insert(gram, j, unused);
    }
    const Index m = size();
    Vector g(m);
    for (Index a = 0; a < m; ++a) g[a] = gram(order_[static_cast<std::size_t>(a)], k);
    const auto tri = L_.topLeftCorner(m, m).triangularView<Eigen::Lower>();
    const Vector w = tri.solve(g);
    const double d2 = gram(k, k) - w.squaredNorm();
    if (!(d2 > 1e-10 * gram(k, k))) {
        null.resize(m + 1);
        null.head(m) = -tri.transpose().solve(w);
        null[m] = 1.0;
        return false;
    }
    L_.row(m).head(m) = w.transpose();
    L_(m, m) = std::sqrt(d2);
    order_.push_back(k);
    where_[static_cast<std::size_t>(k)] = m;
    return true;
}

void ActiveFactor::erase(Index pos) {
    const Index m = size();
    for (Index i = pos; i + 1 < m; ++i) L_.row(i).head(m) = L_.row(i + 1).head(m);
    // Rows pos..m-2 now carry one entry right of the diagonal; rotate it away.
    for (Index j = pos; j + 1 < m; ++j) {
        const double x = L_(j, j), y = L_(j, j + 1);
        const double r = std::hypot(x, y);
        if (r == 0.0) continue;
        const double c = x / r, s = y / r;
        for (Index i = j; i + 1 < m; ++i) {
            const double u = L_(i, j), v = L_(i, j + 1);
            L_(i, j) = c * u + s * v;
            L_(i, j + 1) = -s * u + c * v;
        }
    }
    L_.row(m - 1).head(m).setZero();
    L_.col(m - 1).head(m).setZero();
    where_[static_cast<std::size_t>(order_[static_cast<std::size_t>(pos)])] = -1;
    order_.erase(order_.begin() + pos);
    for (Index a = pos; a < m - 1; ++a) where_[static_cast<std::size_t>(order_[static_cast<std::size_t>(a)])] = a;
    ++updates_;
}

Vector ActiveFactor::solve(const Vector& rhs) const {
    const Index m = size();
    const auto tri = L_.topLeftCorner(m, m).triangularView<Eigen::Lower>();
    return tri.transpose().solve(tri.solve(rhs));
}

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Feature-sign search: fixed-sign Newton solves on a working set with a line
// search over sign changes. A dependent working set is resolved by moving
// along its null direction (fit unchanged) until a coefficient reaches zero.
bool feature_sign(const Matrix& gram, const Vector& cross, double lambda, Vector& beta, Vector& grad,
                  Index excluded, double tol, ActiveFactor& factor) {
    const Index p = gram.rows();
    Vector theta = beta.unaryExpr([](double v) { return sign_of(v); });
    auto refresh = [&] {
        grad = cross;
        for (Index k = 0; k < p; ++k)
            if (beta[k] != 0.0) grad.noalias() -= gram.col(k) * beta[k];
    };
    auto shift = [&](Index k, double delta) {
        if (delta == 0.0) return;
        beta[k] += delta;
        grad.noalias() -= gram.col(k) * delta;
    };
    refresh();
    const int budget = static_cast<int>(4 * p + 50);
    for (int it = 0; it < budget; ++it) {
        if (kkt_from_gradient(grad, beta, lambda, excluded) <= tol) {
            refresh();
            if (kkt_from_gradient(grad, beta, lambda, excluded) <= tol) return true;
        }

        double worst_inactive = 0.0, worst_active = 0.0;
        Index enter = -1;
        for (Index k = 0; k < p; ++k) {
            if (k == excluded) continue;
            if (theta[k] == 0.0) {
                const double excess = std::abs(grad[k]) - lambda;
                if (excess > worst_inactive) {
                    worst_inactive = excess;
                    enter = k;
                }
            } else if (beta[k] != 0.0) {
                worst_active = std::max(worst_active, std::abs(grad[k] - lambda * theta[k]));
            }
        }
        if (worst_active <= tol && enter >= 0) theta[enter] = grad[enter] > 0.0 ? 1.0 : -1.0;

        for (Index pos = factor.size() - 1; pos >= 0; --pos)
            if (theta[factor.order()[static_cast<std::size_t>(pos)]] == 0.0) factor.erase(pos);
        bool swapped = false;
        for (Index k = 0; k < p && !swapped; ++k) {
            if (theta[k] == 0.0 || factor.position(k) >= 0) continue;
            Vector v;
            if (factor.insert(gram, k, v)) continue;
            IndexSet coords = factor.order();
            coords.push_back(k);
            const auto m = static_cast<Index>(coords.size());
            if (beta[k] == 0.0) {
                if (v[m - 1] * theta[k] < 0.0) v = -v;
            } else {
                double slope = 0.0;
                for (Index a = 0; a < m; ++a) {
                    const Index j = coords[static_cast<std::size_t>(a)];
                    slope += v[a] * (lambda * theta[j] - grad[j]);
                }
                if (slope > 0.0) v = -v;
            }
            double step = std::numeric_limits<double>::infinity();
            Index hit = -1;
            for (Index a = 0; a < m; ++a) {
                const double b = beta[coords[static_cast<std::size_t>(a)]];
                if (b == 0.0 || b * v[a] >= 0.0) continue;
                if (-b / v[a] < step) {
                    step = -b / v[a];
                    hit = a;
                }
            }
            if (hit < 0) return false;
            for (Index a = 0; a < m; ++a) {
                const Index j = coords[static_cast<std::size_t>(a)];
                double next = a == hit ? 0.0 : beta[j] + step * v[a];
                if (theta[j] != 0.0 && beta[j] != 0.0 && sign_of(next) != theta[j]) next = 0.0;
                shift(j, next - beta[j]);
                theta[j] = sign_of(beta[j]);
            }
            swapped = true;
        }
        if (swapped) continue;

        const IndexSet& set = factor.order();
        const Index m = factor.size();
        if (m == 0) return false;
        Vector rhs(m), start(m);
        for (Index a = 0; a < m; ++a) {
            const Index k = set[static_cast<std::size_t>(a)];
            rhs[a] = cross[k] - lambda * theta[k];
            start[a] = beta[k];
        }
        const Vector target = factor.solve(rhs);
        if (!target.allFinite()) return false;

        // Objective change along start + t (target - start), relative to start.
        const Vector dir = target - start;
        double lin = 0.0;
        for (Index a = 0; a < m; ++a) lin += dir[a] * grad[set[static_cast<std::size_t>(a)]];
        Vector gdir = Vector::Zero(m);
        for (Index a = 0; a < m; ++a)
            for (Index b = 0; b < m; ++b)
                gdir[a] += gram(set[static_cast<std::size_t>(a)], set[static_cast<std::size_t>(b)]) * dir[b];
        const double quad = dir.dot(gdir);
        const double l1_start = start.lpNorm<1>();
        auto change = [&](double t) {
            return -2.0 * t * lin + t * t * quad + 2.0 * lambda * ((start + t * dir).lpNorm<1>() - l1_start);
        };
        double best_t = 1.0, best = change(1.0);
        Index zeroed = -1;
        for (Index a = 0; a < m; ++a) {
            if (start[a] == 0.0 || target[a] * start[a] >= 0.0) continue;
            const double t = start[a] / (start[a] - target[a]);
            const double value = change(t);
            if (value < best) {
                best = value;
                best_t = t;
                zeroed = a;
            }
        }
        for (Index a = 0; a < m; ++a) {
            const Index k = set[static_cast<std::size_t>(a)];
            const double next = a == zeroed ? 0.0 : start[a] + best_t * dir[a];
            shift(k, next - beta[k]);
            theta[k] = sign_of(beta[k]);
        }
    }
    refresh();
    return kkt_from_gradient(grad, beta, lambda, excluded) <= tol;
}

}  // namespace

DescentResult coordinate_descent(const Matrix& gram, const Vector& cross, double lambda, Vector& beta,
                                 Index excluded, const SolverOptions& options, ActiveFactor* factor) {
    ActiveFactor local;
    ActiveFactor& active_factor = factor ? *factor : local;
    const Index p = gram.rows();
    if (excluded != kNoExclusion) beta[excluded] = 0.0;

    auto fresh_gradient = [&] {
        Vector g = cross;
        for (Index k = 0; k < p; ++k)
            if (beta[k] != 0.0) g.noalias() -= gram.col(k) * beta[k];
        return g;
    };
    Vector grad = fresh_gradient();

    auto update = [&](Index k) {
        const double d = gram(k, k);
        if (k == excluded || d <= 0.0) return 0.0;
        const double old = beta[k];
        const double fresh = soft_threshold(grad[k] + d * old, lambda) / d;
        const double delta = fresh - old;
        if (delta == 0.0) return 0.0;
        beta[k] = fresh;
        grad.noalias() -= gram.col(k) * delta;
        return std::abs(delta) * std::sqrt(d);
    };

    auto finish = [&] {
        Vector candidate = beta;
        Vector g = grad;
        if (!feature_sign(gram, cross, lambda, candidate, g, excluded, 0.5 * options.kkt_tol, active_factor))
            return false;
        beta = std::move(candidate);
        grad = std::move(g);
        return true;
    };

    DescentResult result;
    double update_tol = options.update_tol;
    IndexSet active, previous = support_of(beta);
    while (result.sweeps < options.max_sweeps) {
        double biggest = 0.0;
        for (Index k = 0; k < p; ++k) biggest = std::max(biggest, update(k));
        ++result.sweeps;

        active = support_of(beta);
        if (biggest >= update_tol && active == previous && finish()) {
            result.kkt_violation = kkt_from_gradient(grad, beta, lambda, excluded);
            result.converged = true;
            return result;
        }
        previous = active;

        if (biggest < update_tol) {
            grad = fresh_gradient();
            result.kkt_violation = kkt_from_gradient(grad, beta, lambda, excluded);
            if (result.kkt_violation <= options.kkt_tol) {
                result.converged = true;
                return result;
            }
            update_tol *= 0.1;
            continue;
        }

        for (int stage = 0; result.sweeps < options.max_sweeps; ++stage) {
            double inner = 0.0;
            for (Index k : active) inner = std::max(inner, update(k));
            ++result.sweeps;
            if (inner < update_tol) break;
            if (stage % 4 == 3 && finish()) {
                result.kkt_violation = kkt_from_gradient(grad, beta, lambda, excluded);
                result.converged = true;
                return result;
            }
        }
    }
    grad = fresh_gradient();
    result.kkt_violation = kkt_from_gradient(grad, beta, lambda, excluded);
    return result;
}

}  // namespace gram

std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed) {
    if (folds < 2 || folds > n)
        throw ConfigError("fold count " + std::to_string(folds) + " must lie in [2, " + std::to_string(n) + "]");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(mix_seed(seed));
    // Fisher-Yates with explicit draws so the permutation does not depend on
    // the standard library's shuffle.
    for (Index i = n - 1; i > 0; --i) {
        auto j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (Index pos = 0; pos < n; ++pos)
        fold[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = static_cast<int>(pos % folds);
    return fold;
}

PreparedDesign::PreparedDesign(const Eigen::Ref<const Matrix>& X) : X_(X) {
    if (X_.rows() < 2) throw ConfigError("design needs at least 2 rows");
    if (X_.cols() < 1) throw ConfigError("design needs at least 1 column");
    if (!X_.allFinite()) throw DataError("design matrix has non-finite entries");
    gram_.noalias() = X_.transpose() * X_;
    gram_ /= static_cast<double>(X_.rows());
}

Vector PreparedDesign::cross(const Vector& y) const {
    return X_.transpose() * y / static_cast<double>(n());
}

double PreparedDesign::lambda_max(const Vector& y, Index excluded) const {
    Vector c = cross(y);
    if (excluded != kNoExclusion) c[excluded] = 0.0;
    return c.cwiseAbs().maxCoeff();
}

LassoFit PreparedDesign::fit(const Vector& y, double lambda, const Vector* warm_start, Index excluded,
                             const SolverOptions& options) const {
    if (y.size() != n()) throw ConfigError("response length does not match design rows");
    if (!y.allFinite()) throw DataError("response has non-finite entries");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite nonnegative number");
    Vector beta = Vector::Zero(p());
    if (warm_start) {
        if (warm_start->size() != p()) throw ConfigError("warm start length does not match design columns");
        if (!warm_start->allFinite()) throw DataError("warm start has non-finite entries");
        beta = *warm_start;
    }
    const Vector c = cross(y);

    LassoFit fit;
    fit.lambda = lambda;
    SolverOptions attempt = options;
    for (int round = 0; round < 4; ++round) {
        gram::DescentResult dr = gram::coordinate_descent(gram_, c, lambda, beta, excluded, attempt);
        fit.sweeps += dr.sweeps;
        fit.residuals = y - X_ * beta;
        fit.kkt_violation = kkt_violation(X_, fit.residuals, beta, lambda, excluded);
        if (fit.kkt_violation <= options.kkt_tol) break;
        if (!dr.converged && round == 3) break;
        // Gram and data-space gradients disagree only by rounding; tighten and retry.
        attempt.update_tol *= 0.01;
        attempt.kkt_tol *= 0.1;
    }
    if (fit.kkt_violation > options.kkt_tol)
        throw ConvergenceError("lasso did not satisfy KKT at lambda=" + std::to_string(lambda) +
                                   " (violation " + std::to_string(fit.kkt_violation) + ")",
                               fit.kkt_violation);
    record_fit(fit.kkt_violation, false);
    fit.coefficients = std::move(beta);
    fit.active_set = support_of(fit.coefficients);
    fit.objective = fit.residuals.squaredNorm() / static_cast<double>(n()) +
                    2.0 * lambda * fit.coefficients.lpNorm<1>();
    return fit;
}

Vector PreparedDesign::cv_errors(const Vector& y, std::span<const double> lambdas, int folds, std::uint64_t seed,
                                 Index excluded, const SolverOptions& options) const {
    const Index rows = n();
    const std::vector<int> fold = fold_assignment(rows, folds, seed);
    const Vector full_cross = cross(y);
    Vector errors = Vector::Zero(static_cast<Index>(lambdas.size()));

    for (int f = 0; f < folds; ++f) {
        IndexSet held;
        for (Index t = 0; t < rows; ++t)
            if (fold[static_cast<std::size_t>(t)] == f) held.push_back(t);
        const auto n_held = static_cast<Index>(held.size());
        if (n_held < 1) throw ConfigError("cross-validation fold " + std::to_string(f) + " is empty");
        const Index n_train = rows - n_held;

        const Matrix X_held = X_(held, Eigen::all);
        const Vector y_held = y(held);
        Matrix g_train = gram_ * static_cast<double>(rows);
        g_train.noalias() -= X_held.transpose() * X_held;
        g_train /= static_cast<double>(n_train);
        Vector c_train = full_cross * static_cast<double>(rows);
        c_train.noalias() -= X_held.transpose() * y_held;
        c_train /= static_cast<double>(n_train);

        Vector beta = Vector::Zero(p());
        gram::ActiveFactor factor;
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            gram::DescentResult dr =
                gram::coordinate_descent(g_train, c_train, lambdas[l], beta, excluded, options, &factor);
            if (!dr.converged)
                throw ConvergenceError("cross-validation fit did not converge at lambda=" +
                                           std::to_string(lambdas[l]),
                                       dr.kkt_violation);
            record_fit(dr.kkt_violation, true);
            Vector pred = Vector::Zero(n_held);
            for (Index k = 0; k < p(); ++k)
                if (beta[k] != 0.0) pred.noalias() += X_held.col(k) * beta[k];
            errors[static_cast<Index>(l)] += (y_held - pred).squaredNorm() / static_cast<double>(n_held);
        }
    }
    return errors / static_cast<double>(folds);
}

LassoFit lasso_fit(const DesignProblem& problem, double lambda, const SolverOptions& options) {
    validate(problem);
    PreparedDesign design(problem.X);
    return design.fit(problem.y, lambda, nullptr, kNoExclusion, options);
}

LassoFit lasso_fit(const DesignProblem& problem, double lambda, const Vector& warm_start,
                   const SolverOptions& options) {
    validate(problem);
    PreparedDesign design(problem.X);
    return design.fit(problem.y, lambda, &warm_start, kNoExclusion, options);
}

std::vector<LassoFit> lasso_path(const DesignProblem& problem, const LambdaPath& path,
                                 const SolverOptions& options) {
    validate(problem);
    if (path.values.empty()) throw ConfigError("lambda path is empty");
    PreparedDesign design(problem.X);
    const Vector y = problem.y;
    std::vector<LassoFit> fits;
    fits.reserve(path.count());
    Vector warm = Vector::Zero(problem.p());
    for (double lambda : path.values) {
        try {
            fits.push_back(design.fit(y, lambda, &warm, kNoExclusion, options));
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string("lasso path failed: ") + e.what(), e.kkt_violation());
        }
        warm = fits.back().coefficients;
    }
    return fits;
}

CvResult cv_select_lambda(const DesignProblem& problem, const LambdaPath& path, int folds, std::uint64_t seed,
                          const SolverOptions& options) {
    validate(problem);
    if (path.values.empty()) throw ConfigError("lambda path is empty");
    for (Index k = 0; k < problem.p(); ++k)
        if (problem.X.col(k).squaredNorm() == 0.0)
            throw DataError("column " + std::to_string(k) + " is identically zero; cannot cross-validate");
    PreparedDesign design(problem.X);
    CvResult result;
    result.cv_errors = design.cv_errors(problem.y, path.values, folds, seed, kNoExclusion, options);
    // Path runs largest-first, so strict < keeps the larger lambda on ties.
    for (std::size_t l = 1; l < path.count(); ++l)
        if (result.cv_errors[static_cast<Index>(l)] < result.cv_errors[static_cast<Index>(result.index)])
            result.index = l;
    result.lambda = path.values[result.index];
    return result;
}

Vector ols_refit(const DesignProblem& problem, const IndexSet& support) {
    validate(problem);
    Vector beta = Vector::Zero(problem.p());
    if (support.empty()) return beta;
    for (Index k : support)
        if (k < 0 || k >= problem.p()) throw ConfigError("support index out of range");
    if (static_cast<Index>(support.size()) > problem.n())
        throw SingularityError("support of size " + std::to_string(support.size()) + " exceeds row count");
    const Matrix Xs = problem.X(Eigen::all, support);
    Eigen::ColPivHouseholderQR<Matrix> qr(Xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Index>(support.size()))
        throw SingularityError("restricted design is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                               std::to_string(support.size()) + ")");
    const Vector coef = qr.solve(Vector(problem.y));
    for (std::size_t k = 0; k < support.size(); ++k) beta[support[k]] = coef[static_cast<Index>(k)];
    return beta;
}

}  // namespace sparsevar
