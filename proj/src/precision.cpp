#include "sparsevar/precision.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "sparsevar/error.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

namespace {

std::atomic<std::uint64_t> g_nodewise_runs{0};

constexpr double kMinTauSq = 1e-12;
constexpr char kCacheMagic[8] = {'S', 'V', 'P', 'R', 'E', 'C', '0', '1'};

class Fnv1a {
public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    template <class T>
    void value(const T& v) {
        bytes(&v, sizeof(T));
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void write_block(std::ostream& out, const double* data, Index count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void read_block(std::istream& in, double* data, Index count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace

double select_lambda(const PreparedDesign& design, const Vector& y, const LambdaSpec& spec, std::uint64_t seed,
                     Index excluded, const SolverOptions& options) {
    if (spec.fixed) {
        if (!(*spec.fixed >= 0.0)) throw ConfigError("fixed lambda must be nonnegative");
        return *spec.fixed;
    }
    const double top = design.lambda_max(y, excluded);
    if (top == 0.0) return 0.0;
    const LambdaPath path = LambdaPath::geometric(top, spec.path_count, spec.path_ratio);
    const Vector errors = design.cv_errors(y, path.values, spec.folds, seed, excluded, options);
    std::size_t best = 0;
    for (std::size_t l = 1; l < path.count(); ++l)
        if (errors[static_cast<Index>(l)] < errors[static_cast<Index>(best)]) best = l;
    return path.values[best];
}

Vector PrecisionEstimate::theta_row(Index j) const {
    Vector row = -gamma.row(j).transpose();
    row[j] = 1.0;
    return row / tau_sq[j];
}

Matrix PrecisionEstimate::theta() const {
    Matrix t(p(), p());
    for (Index j = 0; j < p(); ++j) t.row(j) = theta_row(j).transpose();
    return t;
}

PrecisionEstimate nodewise_lasso(const PreparedDesign& design, const NodewiseOptions& options, std::uint64_t seed) {
    const Index n = design.n();
    const Index p = design.p();
    if (p < 2) throw ConfigError("nodewise lasso needs at least 2 columns");
    if (!options.per_column.empty() && static_cast<Index>(options.per_column.size()) != p)
        throw ConfigError("per-column lambda count does not match design columns");

    PrecisionEstimate est;
    est.gamma = Matrix::Zero(p, p);
    est.node_residuals.resize(n, p);
    est.tau_sq.resize(p);
    est.node_lambdas.resize(p);
    est.z_dot_x.resize(p);
    est.z_norm.resize(p);
    est.design_hash = content_hash(design.X());

    parallel_for(static_cast<std::size_t>(p), options.threads, [&](std::size_t jj) {
        const auto j = static_cast<Index>(jj);
        const Vector target = design.X().col(j);
        const double lambda = options.per_column.empty()
                                  ? select_lambda(design, target, options.lambda, derive_seed(seed, jj), j,
                                                  options.solver)
                                  : options.per_column[jj];
        if (!(lambda >= 0.0)) throw ConfigError("nodewise lambda must be nonnegative");
        LassoFit fit = design.fit(target, lambda, nullptr, j, options.solver);
        g_nodewise_runs.fetch_add(1, std::memory_order_relaxed);

        const double tau_sq =
            fit.residuals.squaredNorm() / static_cast<double>(n) + lambda * fit.coefficients.lpNorm<1>();
        if (!(tau_sq >= kMinTauSq))
            throw DegenerateError("nodewise scale tau^2 for column " + std::to_string(j) + " is " +
                                  std::to_string(tau_sq) + " (column is constant zero or collinear)");
        est.gamma.row(j) = fit.coefficients.transpose();
        est.node_lambdas[j] = lambda;
        est.tau_sq[j] = tau_sq;
        est.z_dot_x[j] = fit.residuals.dot(target);
        est.z_norm[j] = fit.residuals.norm();
        est.node_residuals.col(j) = std::move(fit.residuals);
    });
    return est;
}

PrecisionEstimate nodewise_lasso(const Matrix& X, const NodewiseOptions& options, std::uint64_t seed) {
    PreparedDesign design(X);
    return nodewise_lasso(design, options, seed);
}

double relaxed_inverse_check(const PrecisionEstimate& estimate, const Eigen::Ref<const Matrix>& X) {
    if (X.rows() != estimate.n() || X.cols() != estimate.p())
        throw ConfigError("design shape does not match precision estimate");
    // Row j of Theta * Sigma_hat equals Z_j^T X / (n tau_j^2).
    Matrix product = estimate.node_residuals.transpose() * X / static_cast<double>(X.rows());
    double worst = 0.0;
    for (Index j = 0; j < estimate.p(); ++j)
        for (Index k = 0; k < estimate.p(); ++k)
            if (k != j) worst = std::max(worst, std::abs(product(j, k)) / estimate.tau_sq[j]);
    return worst;
}

Vector relaxed_inverse_bounds(const PrecisionEstimate& estimate) {
    return estimate.node_lambdas.cwiseQuotient(estimate.tau_sq);
}

std::uint64_t nodewise_regression_count() { return g_nodewise_runs.load(); }

std::uint64_t content_hash(const Eigen::Ref<const Matrix>& X) {
    Fnv1a h;
    h.value(static_cast<std::int64_t>(X.rows()));
    h.value(static_cast<std::int64_t>(X.cols()));
    for (Index k = 0; k < X.cols(); ++k)
        for (Index t = 0; t < X.rows(); ++t) h.value(X(t, k));
    return h.digest();
}

std::uint64_t precision_cache_key(std::uint64_t design_hash, const NodewiseOptions& options, std::uint64_t seed) {
    Fnv1a h;
    h.value(design_hash);
    h.value(seed);
    h.value(static_cast<std::uint8_t>(options.lambda.fixed.has_value()));
    h.value(options.lambda.fixed.value_or(0.0));
    h.value(options.lambda.folds);
    h.value(options.lambda.path_count);
    h.value(options.lambda.path_ratio);
    for (double v : options.per_column) h.value(v);
    h.value(options.solver.kkt_tol);
    h.value(options.solver.update_tol);
    h.value(options.solver.max_sweeps);
    return h.digest();
}

void save_precision(const PrecisionEstimate& estimate, std::uint64_t key, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open precision cache for writing: " + path.string());
    out.write(kCacheMagic, sizeof(kCacheMagic));
    write_pod(out, key);
    write_pod(out, estimate.design_hash);
    write_pod(out, static_cast<std::int64_t>(estimate.n()));
    write_pod(out, static_cast<std::int64_t>(estimate.p()));
    write_block(out, estimate.gamma.data(), estimate.gamma.size());
    write_block(out, estimate.node_residuals.data(), estimate.node_residuals.size());
    write_block(out, estimate.tau_sq.data(), estimate.p());
    write_block(out, estimate.node_lambdas.data(), estimate.p());
    write_block(out, estimate.z_dot_x.data(), estimate.p());
    write_block(out, estimate.z_norm.data(), estimate.p());
    if (!out) throw DataError("failed writing precision cache: " + path.string());
}

std::optional<PrecisionEstimate> load_precision(const std::filesystem::path& path, std::uint64_t key) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[sizeof(kCacheMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw DataError("not a precision cache file: " + path.string());
    if (read_pod<std::uint64_t>(in) != key) return std::nullopt;
    PrecisionEstimate est;
    est.design_hash = read_pod<std::uint64_t>(in);
    const auto n = static_cast<Index>(read_pod<std::int64_t>(in));
    const auto p = static_cast<Index>(read_pod<std::int64_t>(in));
    if (!in || n < 2 || p < 2 || n > (1 << 26) || p > (1 << 20))
        throw DataError("corrupt precision cache header: " + path.string());
    est.gamma.resize(p, p);
    est.node_residuals.resize(n, p);
    est.tau_sq.resize(p);
    est.node_lambdas.resize(p);
    est.z_dot_x.resize(p);
    est.z_norm.resize(p);
    read_block(in, est.gamma.data(), est.gamma.size());
    read_block(in, est.node_residuals.data(), est.node_residuals.size());
    read_block(in, est.tau_sq.data(), p);
    read_block(in, est.node_lambdas.data(), p);
    read_block(in, est.z_dot_x.data(), p);
    read_block(in, est.z_norm.data(), p);
    if (!in) throw DataError("truncated precision cache: " + path.string());
    return est;
}

}  // namespace sparsevar
