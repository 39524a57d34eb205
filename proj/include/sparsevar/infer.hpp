#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/method.hpp"
#include "sparsevar/panel.hpp"
#include "sparsevar/precision.hpp"

namespace sparsevar {

inline constexpr const char* kVersion = "0.1.0";

struct InferOptions {
    Method method = Method::ldpe;  // ldpe, bt_ldpe or multi_bt_ldpe
    double alpha = 0.05;
    int bootstrap_b = 500;
    /// Bootstrap knobs other than scheme/replications/seed/threads.
    BootstrapConfig bootstrap;
    LambdaSpec lambda = LambdaSpec::cross_validated();
    NodewiseOptions nodewise;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Divide each predictor column by its root mean square before fitting;
    /// estimates and bounds are mapped back to the original scale.
    bool standardize = false;
    std::optional<std::filesystem::path> precision_cache;
};

struct EquationFailure {
    Index equation = 0;
    std::string stage;
    std::string message;
};

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Row i of each matrix is equation i (series i regressed on all lags).
struct InferenceMatrixResult {
    std::vector<std::string> labels;
    InferOptions options;
    Index n = 0;
    Matrix lasso;
    Matrix lasso_ols;
    Matrix debiased;
    Matrix lower;
    Matrix upper;
    BoolMatrix significant;
    Vector lambdas;
    Vector sigma_hat;
    std::vector<EquationFailure> failures;
    std::uint64_t design_hash = 0;
    std::uint64_t nodewise_regressions = 0;
    bool precision_from_cache = false;
    double nodewise_seconds = 0.0;
    double equation_seconds = 0.0;

    Index p() const { return static_cast<Index>(labels.size()); }
    Index significant_count() const { return significant.count(); }
};

/// Shared nodewise pass (or cached copy) followed by all p equations.
/// Per-equation failures leave NaN rows and an entry in `failures`.
InferenceMatrixResult infer_matrix(const LaggedPanel& panel, const InferOptions& options);

/// Runs (or loads) only the nodewise pass, writing the cache file.
PrecisionEstimate cache_precision(const LaggedPanel& panel, const InferOptions& options, bool* loaded = nullptr);

inline constexpr const char* kIntervalsHeader = "row_label,col_label,estimate,lower,upper,significant";

struct EmitOptions {
    bool long_format = true;
};

/// Writes intervals.csv, significance.csv, manifest.json and (optionally)
/// estimates_long.csv into `directory`; returns the paths written.
std::vector<std::filesystem::path> emit_outputs(const InferenceMatrixResult& result,
                                                const std::filesystem::path& directory,
                                                const EmitOptions& emit = {});

}  // namespace sparsevar
