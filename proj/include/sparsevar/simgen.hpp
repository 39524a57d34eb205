#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/method.hpp"
#include "sparsevar/precision.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

/// Sparse transition matrix: s nonzeros per row (diagonal included) with
/// magnitudes uniform on [low, high] and random sign, rescaled to the target
/// spectral radius.
struct TransitionSpec {
    Index p = 1;
    Index s = 1;
    double magnitude_low = 0.5;
    double magnitude_high = 1.0;
    double target_spectral_radius = 0.9;
    std::uint64_t seed = 0;
};

enum class ErrorFamily { gauss_homo, nongauss_homo, gauss_hetero, nongauss_hetero };

std::string_view to_string(ErrorFamily family);
ErrorFamily parse_error_family(std::string_view text);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& A);

Matrix gen_transition(const TransitionSpec& spec);

/// One innovation vector. xi ~ N(0, I); non-Gaussian families use
/// (xi^2 - 1) / sqrt(2) coordinatewise; heteroscedastic families scale the
/// whole vector by eta ~ U(1, 3).
Vector draw_errors(ErrorFamily family, Index p, Rng& rng);
Vector draw_errors(ErrorFamily family, Index p, std::uint64_t seed);

inline constexpr int kDefaultBurnIn = 500;

/// y_t = A y_{t-1} + e_t started from zero; the first `burn_in` points are
/// discarded and rows y_0..y_n returned.
Matrix simulate_var(const Matrix& A, Index n, ErrorFamily family, int burn_in, std::uint64_t seed);

struct ExperimentConfig {
    Index n = 100;
    Index p = 100;
    Index s = 5;
    ErrorFamily family = ErrorFamily::gauss_homo;
    std::vector<Method> methods{Method::lasso, Method::lasso_ols, Method::ldpe};
    int replications = 100;
    double alpha = 0.05;
    int bootstrap_b = 500;
    std::uint64_t seed = 1;
    IndexSet rows{0};
    double spectral_radius = 0.9;
    int burn_in = kDefaultBurnIn;
    bool redraw_transition = false;
    int threads = 1;
    LambdaSpec lambda = LambdaSpec::cross_validated();
    LambdaSpec node_lambda = LambdaSpec::cross_validated();
    BootstrapConfig bootstrap;  // scheme, replications and seed are set per run
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Result of one method on one reported row in one replication.
struct ReplicationRecord {
    int replication = 0;
    Method method = Method::ldpe;
    Index row = 0;
    bool ok = true;
    std::string failure;
    Vector truth;
    Vector estimate;
    Vector lower;  // empty for point-estimate methods
    Vector upper;
};

struct EntryMetrics {
    Method method = Method::ldpe;
    Index row = 0;
    Index col = 0;
    double truth = 0.0;
    std::string group;  // "zero", "nonzero" or "mixed" (redrawn A)
    int replications = 0;
    double abs_bias = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;     // NaN for point-estimate methods
    double mean_length = 0.0;  // NaN for point-estimate methods
};

struct GroupMetrics {
    Method method = Method::ldpe;
    std::string group;
    int entries = 0;
    double abs_bias = 0.0;
    double rmse = 0.0;
    double coverage = 0.0;
    double mean_length = 0.0;
};

struct SimulationReport {
    std::vector<Method> methods;
    int replications = 0;
    std::vector<EntryMetrics> entries;
    std::vector<GroupMetrics> groups;
    /// Failed (replication, method, row) triples, dropped from aggregates.
    std::vector<ReplicationRecord> failures;

    const GroupMetrics* group(Method method, std::string_view name) const;
};

/// Raw per-replication results; A is drawn once from the experiment seed
/// unless `redraw_transition` is set.
std::vector<ReplicationRecord> run_replications(const ExperimentConfig& config);

/// Pure fold of the records into per-entry and per-group metrics.
SimulationReport aggregate(const std::vector<ReplicationRecord>& records, const std::vector<Method>& methods);

SimulationReport run_experiment(const ExperimentConfig& config, std::vector<ReplicationRecord>* records_out = nullptr);

/// The transition matrix an experiment uses for replication r.
Matrix experiment_transition(const ExperimentConfig& config, int replication);

void write_records_jsonl(std::ostream& out, const std::vector<ReplicationRecord>& records);
std::vector<ReplicationRecord> read_records_jsonl(std::istream& in);

/// CSV with header
/// kind,method,row,col,truth,group,replications,abs_bias,rmse,coverage,mean_length
/// where kind is "entry" or "group" (row/col/truth empty on group rows).
void write_report_csv(std::ostream& out, const SimulationReport& report);

}  // namespace sparsevar
