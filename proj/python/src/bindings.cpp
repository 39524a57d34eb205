#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparsevar/error.hpp"
#include "sparsevar/infer.hpp"
#include "sparsevar/linmodel.hpp"
#include "sparsevar/panel.hpp"
#include "sparsevar/simgen.hpp"

namespace py = pybind11;
using namespace sparsevar;

namespace {

py::dict fit_to_dict(const LassoFit& fit) {
    py::dict d;
    d["coefficients"] = fit.coefficients;
    d["lambda"] = fit.lambda;
    d["active_set"] = fit.active_set;
    d["residuals"] = fit.residuals;
    d["objective"] = fit.objective;
    d["kkt_violation"] = fit.kkt_violation;
    return d;
}

py::dict lasso(const Matrix& X, const Vector& y, double lambda) {
    return fit_to_dict(lasso_fit(DesignProblem(X, y), lambda));
}

py::dict lasso_cv(const Matrix& X, const Vector& y, int folds, std::uint64_t seed) {
    const PreparedDesign design(X);
    const double lambda = select_lambda(design, y, LambdaSpec::cross_validated(folds), seed);
    return fit_to_dict(design.fit(y, lambda));
}

Matrix transition(Index p, Index s, std::uint64_t seed, double spectral_radius) {
    TransitionSpec spec;
    spec.p = p;
    spec.s = s;
    spec.seed = seed;
    spec.target_spectral_radius = spectral_radius;
    return gen_transition(spec);
}

Matrix simulate(const Matrix& A, Index n, const std::string& family, int burn_in, std::uint64_t seed) {
    return simulate_var(A, n, parse_error_family(family), burn_in, seed);
}

Matrix returns(const Matrix& prices) {
    SeriesTable table;
    table.values = prices;
    for (Index t = 0; t < prices.rows(); ++t) table.row_labels.push_back(std::to_string(t));
    for (Index j = 0; j < prices.cols(); ++j) table.columns.push_back("c" + std::to_string(j + 1));
    return prices_to_returns(table).values;
}

py::dict infer(const Matrix& series, const std::string& method, double alpha, int bootstrap_b, std::uint64_t seed,
               int threads, std::vector<std::string> labels) {
    InferOptions options;
    options.method = parse_method(method);
    options.alpha = alpha;
    options.bootstrap_b = bootstrap_b;
    options.seed = seed;
    options.threads = threads;
    const InferenceMatrixResult r = infer_matrix(build_panel(series, std::move(labels)), options);
    py::dict d;
    d["labels"] = r.labels;
    d["n"] = r.n;
    d["lasso"] = r.lasso;
    d["lasso_ols"] = r.lasso_ols;
    d["debiased"] = r.debiased;
    d["lower"] = r.lower;
    d["upper"] = r.upper;
    d["significant"] = Eigen::MatrixXi(r.significant.cast<int>());
    d["lambdas"] = r.lambdas;
    d["sigma_hat"] = r.sigma_hat;
    py::list failures;
    for (const EquationFailure& f : r.failures) failures.append(py::make_tuple(f.equation, f.stage, f.message));
    d["failures"] = failures;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = kVersion;

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

    m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("t"));
    m.def("lasso", &lasso, py::arg("X"), py::arg("y"), py::arg("lam"),
          "Minimizer of |y - Xb|^2/n + 2 lam |b|_1.");
    m.def("lasso_cv", &lasso_cv, py::arg("X"), py::arg("y"), py::arg("folds") = 10, py::arg("seed") = 1);
    m.def("gen_transition", &transition, py::arg("p"), py::arg("s"), py::arg("seed"),
          py::arg("spectral_radius") = 0.9);
    m.def("spectral_radius", &spectral_radius, py::arg("A"));
    m.def("simulate_var", &simulate, py::arg("A"), py::arg("n"), py::arg("family") = "gauss_homo",
          py::arg("burn_in") = kDefaultBurnIn, py::arg("seed") = 0);
    m.def("prices_to_returns", &returns, py::arg("prices"));
    m.def("infer", &infer, py::arg("series"), py::arg("method") = "ldpe", py::arg("alpha") = 0.05,
          py::arg("bootstrap_b") = 500, py::arg("seed") = 1, py::arg("threads") = 1,
          py::arg("labels") = std::vector<std::string>{},
          "Confidence intervals for every transition coefficient of a VAR(1) fitted to `series` (rows are time).");
}
