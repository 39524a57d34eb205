#include "sparsevar/infer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "sparsevar/debias.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

namespace {

constexpr std::uint64_t kNodewiseStream = 1;
constexpr std::uint64_t kEquationStream = 0x1000;
constexpr std::uint64_t kBootstrapStream = 0x2000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

Vector column_scales(const Matrix& X) {
    Vector s(X.cols());
    for (Index k = 0; k < X.cols(); ++k) {
        const double rms = X.col(k).norm() / std::sqrt(static_cast<double>(X.rows()));
        s[k] = rms > 0.0 ? rms : 1.0;
    }
    return s;
}

NodewiseOptions nodewise_options(const InferOptions& options) {
    NodewiseOptions opts = options.nodewise;
    opts.threads = options.threads;
    return opts;
}

PrecisionEstimate obtain_precision(const PreparedDesign& design, const InferOptions& options, bool& loaded) {
    const NodewiseOptions opts = nodewise_options(options);
    const std::uint64_t nodewise_seed = derive_seed(options.seed, kNodewiseStream);
    loaded = false;
    std::uint64_t key = 0;
    if (options.precision_cache) {
        key = precision_cache_key(content_hash(design.X()), opts, nodewise_seed);
        if (auto cached = load_precision(*options.precision_cache, key)) {
            if (cached->n() == design.n() && cached->p() == design.p()) {
                loaded = true;
                return std::move(*cached);
            }
        }
    }
    PrecisionEstimate est = nodewise_lasso(design, opts, nodewise_seed);
    if (options.precision_cache) save_precision(est, key, *options.precision_cache);
    return est;
}

Matrix scaled_design(const LaggedPanel& panel, const InferOptions& options, Vector& scales) {
    scales = options.standardize ? column_scales(panel.X) : Vector::Ones(panel.p());
    return options.standardize ? Matrix(panel.X * scales.cwiseInverse().asDiagonal()) : panel.X;
}

}  // namespace

PrecisionEstimate cache_precision(const LaggedPanel& panel, const InferOptions& options, bool* loaded) {
    if (!options.precision_cache) throw ConfigError("cache_precision needs a cache path");
    Vector scales;
    const Matrix X = scaled_design(panel, options, scales);
    const PreparedDesign design(X);
    bool from_cache = false;
    PrecisionEstimate est = obtain_precision(design, options, from_cache);
    if (loaded) *loaded = from_cache;
    return est;
}

InferenceMatrixResult infer_matrix(const LaggedPanel& panel, const InferOptions& options) {
    if (options.method != Method::ldpe && options.method != Method::bt_ldpe &&
        options.method != Method::multi_bt_ldpe)
        throw ConfigError("infer_matrix method must be ldpe, bt_ldpe or multi_bt_ldpe");
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (options.threads < 1) throw ConfigError("threads must be positive");
    if (panel.Y.rows() != panel.X.rows() || panel.Y.cols() != panel.X.cols())
        throw ConfigError("panel X and Y shapes differ");
    const Index n = panel.n();
    const Index p = panel.p();
    if (n < 2 || p < 2) throw DataError("panel needs at least 2 time points and 2 series");

    InferenceMatrixResult result;
    result.labels = panel.labels;
    result.options = options;
    result.n = n;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Matrix* m : {&result.lasso, &result.lasso_ols, &result.debiased, &result.lower, &result.upper})
        *m = Matrix::Constant(p, p, nan);
    result.lambdas = Vector::Constant(p, nan);
    result.sigma_hat = Vector::Constant(p, nan);

    Vector scales;
    const Matrix X = scaled_design(panel, options, scales);
    const PreparedDesign design(X);
    result.design_hash = content_hash(X);

    const auto nodewise_start = Clock::now();
    const std::uint64_t runs_before = nodewise_regression_count();
    bool loaded = false;
    const PrecisionEstimate precision = obtain_precision(design, options, loaded);
    result.precision_from_cache = loaded;
    result.nodewise_regressions = nodewise_regression_count() - runs_before;
    result.nodewise_seconds = seconds_since(nodewise_start);

    const bool bootstrap = options.method != Method::ldpe;
    std::vector<std::vector<EquationFailure>> failures(static_cast<std::size_t>(p));
    const auto equations_start = Clock::now();
    auto run_equation = [&](std::size_t ii) {
        const auto i = static_cast<Index>(ii);
        const Vector y = panel.Y.col(i);
        EquationInference inf;
        try {
            inf = infer_equation(design, precision, y, i, options.alpha, options.lambda,
                                 derive_seed(options.seed, kEquationStream + ii), options.nodewise.solver);
        } catch (const Error& e) {
            failures[ii].push_back({i, "ldpe", e.what()});
            return;
        }
        result.lasso.row(i) = inf.lasso.coefficients.transpose();
        result.lambdas[i] = inf.lasso.lambda;
        result.sigma_hat[i] = inf.sigma_hat;
        try {
            result.lasso_ols.row(i) = ols_refit(DesignProblem(X, y), inf.lasso.active_set).transpose();
        } catch (const Error& e) {
            failures[ii].push_back({i, "lasso_ols", e.what()});
        }
        if (bootstrap) {
            BootstrapConfig bc = options.bootstrap;
            bc.scheme = options.method == Method::bt_ldpe ? BootstrapScheme::residual : BootstrapScheme::wild;
            bc.replications = options.bootstrap_b;
            bc.seed = derive_seed(options.seed, kBootstrapStream + ii);
            bc.threads = options.threads;
            try {
                inf = bootstrap_equation(design, precision, inf, bc, options.alpha);
            } catch (const Error& e) {
                failures[ii].push_back({i, to_string(options.method).data(), e.what()});
                return;
            }
        }
        result.debiased.row(i) = inf.debiased.transpose();
        result.lower.row(i) = inf.lower.transpose();
        result.upper.row(i) = inf.upper.transpose();
    };
    // Equation-level parallelism for the normal method; the bootstrap
    // parallelizes over replicates inside each equation instead.
    parallel_for(static_cast<std::size_t>(p), bootstrap ? 1 : options.threads, run_equation);
    result.equation_seconds = seconds_since(equations_start);

    if (options.standardize) {
        const Vector inv = scales.cwiseInverse();
        for (Matrix* m : {&result.lasso, &result.lasso_ols, &result.debiased, &result.lower, &result.upper})
            *m = *m * inv.asDiagonal();
    }
    result.significant = (result.lower.array() > 0.0 || result.upper.array() < 0.0).matrix();
    for (auto& f : failures)
        for (auto& e : f) result.failures.push_back(std::move(e));
    return result;
}

std::vector<std::filesystem::path> emit_outputs(const InferenceMatrixResult& result,
                                                const std::filesystem::path& directory, const EmitOptions& emit) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw DataError("cannot create output directory " + directory.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto open = [&](const char* name) {
        std::filesystem::path path = directory / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + path.string());
        written.push_back(path);
        return out;
    };
    const Index p = result.p();
    const auto& L = result.labels;

    {
        auto out = open("intervals.csv");
        out << kIntervalsHeader << '\n';
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                out << csv_field(L[static_cast<std::size_t>(i)]) << ',' << csv_field(L[static_cast<std::size_t>(j)])
                    << ',' << num(result.debiased(i, j)) << ',' << num(result.lower(i, j)) << ','
                    << num(result.upper(i, j)) << ',' << (result.significant(i, j) ? 1 : 0) << '\n';
    }
    {
        auto out = open("significance.csv");
        out << "row_label";
        for (const auto& l : L) out << ',' << csv_field(l);
        out << '\n';
        for (Index i = 0; i < p; ++i) {
            out << csv_field(L[static_cast<std::size_t>(i)]);
            for (Index j = 0; j < p; ++j) out << ',' << (result.significant(i, j) ? 1 : 0);
            out << '\n';
        }
    }
    if (emit.long_format) {
        auto out = open("estimates_long.csv");
        out << "row,col,row_label,col_label,lasso,lasso_ols,debiased,lower,upper,length,significant\n";
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                out << i << ',' << j << ',' << csv_field(L[static_cast<std::size_t>(i)]) << ','
                    << csv_field(L[static_cast<std::size_t>(j)]) << ',' << num(result.lasso(i, j)) << ','
                    << num(result.lasso_ols(i, j)) << ',' << num(result.debiased(i, j)) << ','
                    << num(result.lower(i, j)) << ',' << num(result.upper(i, j)) << ','
                    << num(result.upper(i, j) - result.lower(i, j)) << ',' << (result.significant(i, j) ? 1 : 0)
                    << '\n';
    }
    {
        const InferOptions& o = result.options;
        nlohmann::ordered_json m;
        m["version"] = kVersion;
        m["method"] = std::string(to_string(o.method));
        m["alpha"] = o.alpha;
        m["seed"] = o.seed;
        m["bootstrap_b"] = o.method == Method::ldpe ? 0 : o.bootstrap_b;
        m["threads"] = o.threads;
        m["standardize"] = o.standardize;
        m["lambda_rule"] = o.lambda.fixed ? nlohmann::ordered_json(*o.lambda.fixed)
                                          : nlohmann::ordered_json("cv" + std::to_string(o.lambda.folds));
        m["node_lambda_rule"] = o.nodewise.lambda.fixed
                                    ? nlohmann::ordered_json(*o.nodewise.lambda.fixed)
                                    : nlohmann::ordered_json("cv" + std::to_string(o.nodewise.lambda.folds));
        m["n"] = result.n;
        m["p"] = p;
        char hash[24];
        std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(result.design_hash));
        m["design_hash"] = hash;
        m["nodewise_regressions"] = result.nodewise_regressions;
        m["precision_from_cache"] = result.precision_from_cache;
        m["significant_count"] = result.significant_count();
        m["timings_seconds"] = {{"nodewise", result.nodewise_seconds}, {"equations", result.equation_seconds}};
        auto lambdas = nlohmann::ordered_json::array();
        auto sigmas = nlohmann::ordered_json::array();
        for (Index i = 0; i < p; ++i) {
            lambdas.push_back(std::isnan(result.lambdas[i]) ? nlohmann::ordered_json() : nlohmann::ordered_json(result.lambdas[i]));
            sigmas.push_back(std::isnan(result.sigma_hat[i]) ? nlohmann::ordered_json() : nlohmann::ordered_json(result.sigma_hat[i]));
        }
        m["equation_lambdas"] = lambdas;
        m["sigma_hat"] = sigmas;
        auto failures = nlohmann::ordered_json::array();
        for (const auto& f : result.failures)
            failures.push_back({{"equation", f.equation}, {"label", L[static_cast<std::size_t>(f.equation)]},
                                {"stage", f.stage}, {"message", f.message}});
        m["failures"] = failures;
        auto out = open("manifest.json");
        out << m.dump(2) << '\n';
    }
    return written;
}

}  // namespace sparsevar
