#include "sparsevar/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "sparsevar/debias.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/panel.hpp"
#include "sparsevar/parallel.hpp"

namespace sparsevar {

namespace {

constexpr std::uint64_t kTransitionStream = 0x7a;
constexpr std::uint64_t kReplicationStream = 0x5eed;

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::lasso: return "lasso";
        case Method::lasso_ols: return "lasso_ols";
        case Method::ldpe: return "ldpe";
        case Method::bt_ldpe: return "bt_ldpe";
        case Method::multi_bt_ldpe: return "multi_bt_ldpe";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    if (text == "lasso") return Method::lasso;
    if (text == "lasso_ols" || text == "lasso+ols") return Method::lasso_ols;
    if (text == "ldpe") return Method::ldpe;
    if (text == "bt_ldpe") return Method::bt_ldpe;
    if (text == "multi_bt_ldpe") return Method::multi_bt_ldpe;
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::string_view to_string(ErrorFamily family) {
    switch (family) {
        case ErrorFamily::gauss_homo: return "gauss_homo";
        case ErrorFamily::nongauss_homo: return "nongauss_homo";
        case ErrorFamily::gauss_hetero: return "gauss_hetero";
        case ErrorFamily::nongauss_hetero: return "nongauss_hetero";
    }
    return "unknown";
}

ErrorFamily parse_error_family(std::string_view text) {
    if (text == "gauss_homo") return ErrorFamily::gauss_homo;
    if (text == "nongauss_homo") return ErrorFamily::nongauss_homo;
    if (text == "gauss_hetero") return ErrorFamily::gauss_hetero;
    if (text == "nongauss_hetero") return ErrorFamily::nongauss_hetero;
    throw ConfigError("unknown error family '" + std::string(text) + "'");
}

double spectral_radius(const Matrix& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw ConfigError("spectral radius needs a nonempty square matrix");
    Eigen::EigenSolver<Matrix> solver(A, false);
    if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue computation failed", 0.0);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix gen_transition(const TransitionSpec& spec) {
    if (spec.p < 1) throw ConfigError("transition dimension must be positive");
    if (spec.s < 1 || spec.s > spec.p) throw ConfigError("row sparsity s must lie in [1, p]");
    if (!(spec.target_spectral_radius > 0.0 && spec.target_spectral_radius < 1.0))
        throw ConfigError("target spectral radius must lie in (0, 1)");
    if (!(spec.magnitude_low > 0.0 && spec.magnitude_low <= spec.magnitude_high))
        throw ConfigError("magnitude range must satisfy 0 < low <= high");

    Rng rng(mix_seed(spec.seed));
    std::uniform_real_distribution<double> magnitude(spec.magnitude_low, spec.magnitude_high);
    std::bernoulli_distribution negative;
    auto draw = [&] {
        double m = magnitude(rng);
        return negative(rng) ? -m : m;
    };

    const Index p = spec.p;
    Matrix A = Matrix::Zero(p, p);
    std::vector<Index> others;
    for (Index i = 0; i < p; ++i) {
        A(i, i) = draw();
        others.clear();
        for (Index j = 0; j < p; ++j)
            if (j != i) others.push_back(j);
        // Partial Fisher-Yates: the first s-1 slots become the off-diagonal support.
        for (Index k = 0; k < spec.s - 1; ++k) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), others.size() - 1);
            std::swap(others[static_cast<std::size_t>(k)], others[pick(rng)]);
            A(i, others[static_cast<std::size_t>(k)]) = draw();
        }
    }
    const double rho = spectral_radius(A);
    if (!(rho > 0.0)) throw DegenerateError("initial transition matrix is nilpotent; use another seed");
    return (A / rho) * spec.target_spectral_radius;
}

Vector draw_errors(ErrorFamily family, Index p, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector e(p);
    for (Index k = 0; k < p; ++k) e[k] = normal(rng);
    if (family == ErrorFamily::nongauss_homo || family == ErrorFamily::nongauss_hetero)
        e = (e.array().square() - 1.0) / std::numbers::sqrt2;
    if (family == ErrorFamily::gauss_hetero || family == ErrorFamily::nongauss_hetero) {
        std::uniform_real_distribution<double> eta(1.0, 3.0);
        e *= eta(rng);
    }
    return e;
}

Vector draw_errors(ErrorFamily family, Index p, std::uint64_t seed) {
    Rng rng(mix_seed(seed));
    return draw_errors(family, p, rng);
}

Matrix simulate_var(const Matrix& A, Index n, ErrorFamily family, int burn_in, std::uint64_t seed) {
    if (A.rows() != A.cols() || A.rows() == 0) throw ConfigError("transition matrix must be square");
    if (n < 1) throw ConfigError("series length must be positive");
    if (burn_in < 0) throw ConfigError("burn-in must be nonnegative");
    const double rho = spectral_radius(A);
    if (!(rho < 1.0))
        throw DataError("transition matrix is not stable (spectral radius " + std::to_string(rho) + ")");
    Rng rng(mix_seed(seed));
    const Index p = A.rows();
    Vector y = Vector::Zero(p);
    for (int step = 0; step < burn_in; ++step) y = A * y + draw_errors(family, p, rng);
    Matrix out(n + 1, p);
    out.row(0) = y.transpose();
    for (Index t = 1; t <= n; ++t) {
        y = A * y + draw_errors(family, p, rng);
        out.row(t) = y.transpose();
    }
    return out;
}

namespace {

template <class T>
T enum_from_json(const nlohmann::json& v, const std::map<std::string, T>& names, const char* key) {
    if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    auto it = names.find(v.get<std::string>());
    if (it == names.end()) throw ConfigError(std::string("invalid value for '") + key + "'");
    return it->second;
}

LambdaSpec lambda_from_json(const nlohmann::json& v, int folds) {
    if (v.is_number()) return LambdaSpec::fixed_value(v.get<double>());
    if (v.is_string() && v.get<std::string>() == "cv") return LambdaSpec::cross_validated(folds);
    throw ConfigError("lambda must be a number or \"cv\"");
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    static const std::set<std::string> known{
        "n", "p", "s", "family", "methods", "replications", "alpha", "bootstrap_b", "seed", "rows",
        "spectral_radius", "burn_in", "redraw_transition", "threads", "folds", "lambda", "node_lambda",
        "multiplier_law", "lambda_star_rule", "response_center", "pivot_center", "quantile_rule"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("unknown experiment config key '" + it.key() + "'");

    ExperimentConfig c;
    try {
        c.n = j.value("n", c.n);
        c.p = j.value("p", c.p);
        c.s = j.value("s", c.s);
        if (j.contains("family")) c.family = parse_error_family(j["family"].get<std::string>());
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j["methods"]) c.methods.push_back(parse_method(m.get<std::string>()));
        }
        c.replications = j.value("replications", c.replications);
        c.alpha = j.value("alpha", c.alpha);
        c.bootstrap_b = j.value("bootstrap_b", c.bootstrap_b);
        c.seed = j.value("seed", c.seed);
        if (j.contains("rows")) c.rows = j["rows"].get<IndexSet>();
        c.spectral_radius = j.value("spectral_radius", c.spectral_radius);
        c.burn_in = j.value("burn_in", c.burn_in);
        c.redraw_transition = j.value("redraw_transition", c.redraw_transition);
        c.threads = j.value("threads", c.threads);
        const int folds = j.value("folds", 10);
        c.lambda = j.contains("lambda") ? lambda_from_json(j["lambda"], folds) : LambdaSpec::cross_validated(folds);
        c.node_lambda =
            j.contains("node_lambda") ? lambda_from_json(j["node_lambda"], folds) : LambdaSpec::cross_validated(folds);
        if (j.contains("multiplier_law"))
            c.bootstrap.multiplier_law = enum_from_json<MultiplierLaw>(
                j["multiplier_law"],
                {{"standard_normal", MultiplierLaw::standard_normal}, {"rademacher", MultiplierLaw::rademacher}},
                "multiplier_law");
        if (j.contains("lambda_star_rule"))
            c.bootstrap.lambda_star_rule = enum_from_json<LambdaStarRule>(
                j["lambda_star_rule"],
                {{"same_as_original", LambdaStarRule::same_as_original}, {"rescaled", LambdaStarRule::rescaled}},
                "lambda_star_rule");
        if (j.contains("response_center"))
            c.bootstrap.response_center = enum_from_json<ResponseCenter>(
                j["response_center"], {{"debiased", ResponseCenter::debiased}, {"lasso", ResponseCenter::lasso}},
                "response_center");
        if (j.contains("pivot_center"))
            c.bootstrap.pivot_center = enum_from_json<PivotCenter>(j["pivot_center"],
                                                                   {{"response", PivotCenter::response},
                                                                    {"original_lasso", PivotCenter::original_lasso},
                                                                    {"bootstrap_lasso", PivotCenter::bootstrap_lasso}},
                                                                   "pivot_center");
        if (j.contains("quantile_rule"))
            c.bootstrap.quantile_rule = enum_from_json<QuantileRule>(
                j["quantile_rule"],
                {{"order_statistic", QuantileRule::order_statistic}, {"interpolated", QuantileRule::interpolated}},
                "quantile_rule");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config has a field of the wrong type: ") + e.what());
    }

    if (c.n < 2) throw ConfigError("n must be at least 2");
    if (c.p < 2) throw ConfigError("p must be at least 2");
    if (c.s < 1 || c.s > c.p) throw ConfigError("s must lie in [1, p]");
    if (c.replications < 1) throw ConfigError("replications must be at least 1");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (c.bootstrap_b < 2) throw ConfigError("bootstrap_b must be at least 2");
    if (c.methods.empty()) throw ConfigError("at least one method is required");
    if (c.rows.empty()) throw ConfigError("at least one row must be reported");
    for (Index r : c.rows)
        if (r < 0 || r >= c.p) throw ConfigError("reported row " + std::to_string(r) + " outside [0, p)");
    if (c.threads < 1) throw ConfigError("threads must be positive");
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment config " + path.string());
    return parse_experiment_config(in);
}

Matrix experiment_transition(const ExperimentConfig& config, int replication) {
    TransitionSpec spec;
    spec.p = config.p;
    spec.s = config.s;
    spec.target_spectral_radius = config.spectral_radius;
    const std::uint64_t base = derive_seed(config.seed, kTransitionStream);
    spec.seed = config.redraw_transition ? derive_seed(base, static_cast<std::uint64_t>(replication)) : base;
    return gen_transition(spec);
}

std::vector<ReplicationRecord> run_replications(const ExperimentConfig& config) {
    const bool need_debias = std::any_of(config.methods.begin(), config.methods.end(), has_intervals);
    const std::optional<Matrix> fixed_A =
        config.redraw_transition ? std::nullopt : std::optional<Matrix>(experiment_transition(config, 0));
    const std::uint64_t rep_base = derive_seed(config.seed, kReplicationStream);

    std::vector<std::vector<ReplicationRecord>> per_rep(static_cast<std::size_t>(config.replications));
    parallel_for(per_rep.size(), config.threads, [&](std::size_t r) {
        const std::uint64_t rep_seed = derive_seed(rep_base, r);
        const Matrix A = fixed_A ? *fixed_A : experiment_transition(config, static_cast<int>(r));
        const LaggedPanel panel = build_panel(simulate_var(A, config.n, config.family, config.burn_in, rep_seed));
        const PreparedDesign design(panel.X);
        auto& out = per_rep[r];

        std::optional<PrecisionEstimate> precision;
        std::string precision_error;
        if (need_debias) {
            try {
                NodewiseOptions opts;
                opts.lambda = config.node_lambda;
                precision = nodewise_lasso(design, opts, derive_seed(rep_seed, 1));
            } catch (const Error& e) {
                precision_error = std::string("nodewise: ") + e.what();
            }
        }

        for (Index row : config.rows) {
            const Vector y = panel.Y.col(row);
            const std::uint64_t eq_seed = derive_seed(rep_seed, 0x1000 + static_cast<std::uint64_t>(row));
            std::optional<EquationInference> ldpe;
            std::string ldpe_error = precision_error;
            if (precision) {
                try {
                    ldpe = infer_equation(design, *precision, y, row, config.alpha, config.lambda, eq_seed);
                } catch (const Error& e) {
                    ldpe_error = e.what();
                }
            }
            std::optional<LassoFit> lasso;
            std::string lasso_error;
            if (ldpe) {
                lasso = ldpe->lasso;
            } else {
                try {
                    const double lambda = select_lambda(design, y, config.lambda, eq_seed);
                    lasso = design.fit(y, lambda);
                } catch (const Error& e) {
                    lasso_error = e.what();
                }
            }

            for (Method m : config.methods) {
                ReplicationRecord rec;
                rec.replication = static_cast<int>(r);
                rec.method = m;
                rec.row = row;
                rec.truth = A.row(row).transpose();
                try {
                    switch (m) {
                        case Method::lasso:
                            if (!lasso) throw DataError(lasso_error);
                            rec.estimate = lasso->coefficients;
                            break;
                        case Method::lasso_ols:
                            if (!lasso) throw DataError(lasso_error);
                            rec.estimate = ols_refit(DesignProblem(panel.X, y), lasso->active_set);
                            break;
                        case Method::ldpe:
                            if (!ldpe) throw DataError(ldpe_error);
                            rec.estimate = ldpe->debiased;
                            rec.lower = ldpe->lower;
                            rec.upper = ldpe->upper;
                            break;
                        case Method::bt_ldpe:
                        case Method::multi_bt_ldpe: {
                            if (!ldpe) throw DataError(ldpe_error);
                            BootstrapConfig bc = config.bootstrap;
                            bc.scheme = m == Method::bt_ldpe ? BootstrapScheme::residual : BootstrapScheme::wild;
                            bc.replications = config.bootstrap_b;
                            bc.threads = 1;
                            bc.seed = derive_seed(rep_seed, (m == Method::bt_ldpe ? 0x2000 : 0x3000) +
                                                                static_cast<std::uint64_t>(row));
                            EquationInference bt = bootstrap_equation(design, *precision, *ldpe, bc, config.alpha);
                            rec.estimate = bt.debiased;
                            rec.lower = bt.lower;
                            rec.upper = bt.upper;
                            break;
                        }
                    }
                } catch (const Error& e) {
                    rec.ok = false;
                    rec.failure = e.what();
                }
                out.push_back(std::move(rec));
            }
        }
    });

    std::vector<ReplicationRecord> records;
    for (auto& v : per_rep)
        for (auto& rec : v) records.push_back(std::move(rec));
    return records;
}

const GroupMetrics* SimulationReport::group(Method method, std::string_view name) const {
    for (const auto& g : groups)
        if (g.method == method && g.group == name) return &g;
    return nullptr;
}

SimulationReport aggregate(const std::vector<ReplicationRecord>& records, const std::vector<Method>& methods) {
    struct Acc {
        int count = 0;
        double err_sum = 0.0;
        double sq_sum = 0.0;
        int covered = 0;
        double length_sum = 0.0;
        double first_truth = 0.0;
        bool saw_zero = false;
        bool saw_nonzero = false;
        bool intervals = false;
    };
    SimulationReport report;
    report.methods = methods;
    std::map<std::tuple<int, Index, Index>, Acc> acc;  // (method order, row, col)
    std::set<int> replications;
    auto method_order = [&](Method m) {
        auto it = std::find(methods.begin(), methods.end(), m);
        if (it == methods.end()) throw ConfigError("record for a method not in the report list");
        return static_cast<int>(it - methods.begin());
    };

    for (const auto& rec : records) {
        replications.insert(rec.replication);
        if (!rec.ok) {
            report.failures.push_back(rec);
            continue;
        }
        const int mo = method_order(rec.method);
        const bool intervals = rec.lower.size() > 0;
        for (Index j = 0; j < rec.estimate.size(); ++j) {
            Acc& a = acc[{mo, rec.row, j}];
            const double truth = rec.truth[j];
            if (a.count == 0) a.first_truth = truth;
            (truth == 0.0 ? a.saw_zero : a.saw_nonzero) = true;
            const double err = rec.estimate[j] - truth;
            a.err_sum += err;
            a.sq_sum += err * err;
            a.intervals = intervals;
            if (intervals) {
                if (rec.lower[j] <= truth && truth <= rec.upper[j]) ++a.covered;
                a.length_sum += rec.upper[j] - rec.lower[j];
            }
            ++a.count;
        }
    }
    report.replications = static_cast<int>(replications.size());

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [key, a] : acc) {
        EntryMetrics e;
        e.method = methods[static_cast<std::size_t>(std::get<0>(key))];
        e.row = std::get<1>(key);
        e.col = std::get<2>(key);
        e.truth = a.saw_zero && a.saw_nonzero ? nan : a.first_truth;
        e.group = a.saw_zero && a.saw_nonzero ? "mixed" : (a.saw_zero ? "zero" : "nonzero");
        e.replications = a.count;
        const double c = static_cast<double>(a.count);
        e.abs_bias = std::abs(a.err_sum / c);
        e.rmse = std::sqrt(a.sq_sum / c);
        e.coverage = a.intervals ? static_cast<double>(a.covered) / c : nan;
        e.mean_length = a.intervals ? a.length_sum / c : nan;
        report.entries.push_back(std::move(e));
    }

    for (Method m : methods) {
        for (const char* name : {"zero", "nonzero", "mixed"}) {
            GroupMetrics g;
            g.method = m;
            g.group = name;
            for (const auto& e : report.entries) {
                if (e.method != m || e.group != name) continue;
                ++g.entries;
                g.abs_bias += e.abs_bias;
                g.rmse += e.rmse;
                g.coverage += e.coverage;
                g.mean_length += e.mean_length;
            }
            if (g.entries == 0) continue;
            const double k = static_cast<double>(g.entries);
            g.abs_bias /= k;
            g.rmse /= k;
            g.coverage /= k;
            g.mean_length /= k;
            report.groups.push_back(std::move(g));
        }
    }
    return report;
}

SimulationReport run_experiment(const ExperimentConfig& config, std::vector<ReplicationRecord>* records_out) {
    std::vector<ReplicationRecord> records = run_replications(config);
    SimulationReport report = aggregate(records, config.methods);
    if (records_out) *records_out = std::move(records);
    return report;
}

namespace {

nlohmann::json to_json_array(const Vector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
    return a;
}

Vector from_json_array(const nlohmann::json& a) {
    Vector v(static_cast<Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) v[static_cast<Index>(k)] = a[k].get<double>();
    return v;
}

}  // namespace

void write_records_jsonl(std::ostream& out, const std::vector<ReplicationRecord>& records) {
    for (const auto& rec : records) {
        nlohmann::json j;
        j["replication"] = rec.replication;
        j["method"] = std::string(to_string(rec.method));
        j["row"] = rec.row;
        j["ok"] = rec.ok;
        if (!rec.ok) j["failure"] = rec.failure;
        j["truth"] = to_json_array(rec.truth);
        j["estimate"] = to_json_array(rec.estimate);
        if (rec.lower.size() > 0) {
            j["lower"] = to_json_array(rec.lower);
            j["upper"] = to_json_array(rec.upper);
        }
        out << j.dump() << '\n';
    }
}

std::vector<ReplicationRecord> read_records_jsonl(std::istream& in) {
    std::vector<ReplicationRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ReplicationRecord rec;
            rec.replication = j.at("replication").get<int>();
            rec.method = parse_method(j.at("method").get<std::string>());
            rec.row = j.at("row").get<Index>();
            rec.ok = j.at("ok").get<bool>();
            rec.failure = j.value("failure", std::string());
            rec.truth = from_json_array(j.at("truth"));
            rec.estimate = from_json_array(j.at("estimate"));
            if (j.contains("lower")) {
                rec.lower = from_json_array(j["lower"]);
                rec.upper = from_json_array(j["upper"]);
            }
            records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void write_report_csv(std::ostream& out, const SimulationReport& report) {
    out << "kind,method,row,col,truth,group,replications,abs_bias,rmse,coverage,mean_length\n";
    for (const auto& e : report.entries) {
        out << "entry," << to_string(e.method) << ',' << e.row << ',' << e.col << ',' << fmt(e.truth) << ','
            << e.group << ',' << e.replications << ',' << fmt(e.abs_bias) << ',' << fmt(e.rmse) << ','
            << fmt(e.coverage) << ',' << fmt(e.mean_length) << '\n';
    }
    for (const auto& g : report.groups) {
        out << "group," << to_string(g.method) << ",,,," << g.group << ',' << report.replications << ','
            << fmt(g.abs_bias) << ',' << fmt(g.rmse) << ',' << fmt(g.coverage) << ',' << fmt(g.mean_length)
            << '\n';
    }
}

}  // namespace sparsevar
