#ifndef KCML_EVAL_HPP
#define KCML_EVAL_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "kcml/dataset.hpp"
#include "kcml/klr.hpp"
#include "kcml/metric.hpp"

namespace kcml {

enum class Method { doublet_svm, triplet_svm, doublet_klr };

std::string method_name(Method method);
std::optional<Method> parse_method(const std::string& name);

struct EvalConfig {
    Method method = Method::doublet_svm;
    int m1 = 2;
    int m2 = 2;
    double C = 1.0;
    int k = 1; ///< k-NN neighborhood
    std::size_t pca_dim = 0; ///< 0 disables PCA
    bool standardize = true;
    bool raw_metric = false; ///< skip PSD projection before k-NN
    double tolerance = 1e-3;
    std::size_t max_passes = 1000;
    std::uint64_t seed = 0;
    int folds = 10;
    double klr_ridge = 0.0;
    std::size_t klr_max_iter = 500;
    int threads = 0; ///< fold parallelism; 0 = hardware concurrency
    GramOptions gram;
    /// Honored by train_metric only (fold-parallel runs would interleave).
    std::ostream* solver_trace = nullptr;
};

/// Single-dataset training outcome (full dataset, no evaluation).
struct TrainResult {
    Method method = Method::doublet_svm;
    MetricMatrix raw;
    MetricMatrix projected;
    std::size_t constraint_count = 0;
    std::size_t dropped_constraints = 0;
    double train_seconds = 0.0;
    // preprocessing fitted by train_metric; the metric lives in this space
    StandardizeParams standardize;
    PcaModel pca; ///< empty basis when PCA was off
    // solver diagnostics (one of the two applies)
    DualSolution dual;
    KlrSolution klr;
};

/// Preprocesses per config (standardize, PCA), builds constraints, trains,
/// and projects. Timing covers the solver call only.
TrainResult train_metric(const Dataset& data, const EvalConfig& config);

/// train_metric without the preprocessing step, for data already scaled or
/// projected by the caller (run_cv fits preprocessing on each training fold).
TrainResult train_metric_preprocessed(const Dataset& data, const EvalConfig& config);

/// Majority label among the k nearest training samples under the metric;
/// distance ties by smaller training index, vote ties by nearest-first label
/// order, then smaller class id.
int knn_classify(const MetricMatrix& metric, const Dataset& train, std::span<const double> query,
                 int k);

/// 100 * mismatches / N.
double error_rate(std::span<const int> predictions, std::span<const int> truths);

struct EvalReport {
    std::string dataset;
    std::string method;
    EvalConfig config;
    std::vector<std::string> label_names;
    /// Extra resolved run settings (data path, format, command) echoed by
    /// the CLI for reproducibility.
    std::vector<std::pair<std::string, std::string>> run_info;
    std::vector<double> fold_errors;        ///< percentages, by fold index
    std::vector<std::size_t> fold_constraints;
    std::vector<double> fold_train_seconds; ///< wall clock, non-reproducible
    double mean_error = 0.0;
    double total_train_seconds = 0.0;
};

/// Per fold: standardize -> optional PCA -> constraints -> train -> PSD
/// project -> k-NN on the held-out fold. Folds run in parallel; results are
/// merged by fold index. Component failures are annotated with the fold.
EvalReport run_cv(const Dataset& data, const EvalConfig& config, const CvSplit& split);

/// Same pipeline on a defined train/test split (fold_count 1 in the report).
EvalReport run_holdout(const Dataset& train, const Dataset& test, const EvalConfig& config);

/// Mean CV error for each C in c_values. Constraints and the Gram matrix are
/// built once per fold and shared across the C grid, which is what makes
/// C-sensitivity sweeps affordable.
std::vector<double> run_cv_c_grid(const Dataset& data, const EvalConfig& base,
                                  const CvSplit& split, std::span<const double> c_values);

enum class TiePolicy {
    shared_min, ///< tied methods share the minimal rank; later ranks skip
    averaged    ///< tied methods share the mean of the covered ranks
};

struct RankTable {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    Matrix errors; ///< datasets x methods
    Matrix ranks;  ///< datasets x methods
    std::vector<double> average_rank; ///< per method
};

/// Ranks ascending on error per dataset (rank 1 = best) and averages over
/// datasets. shared_min reproduces published average-rank rows.
RankTable average_rank(const std::vector<std::string>& methods,
                       const std::vector<std::string>& datasets, const Matrix& errors,
                       TiePolicy ties = TiePolicy::shared_min);

/// Line-oriented key=value block, includes timings (17 significant digits,
/// timings at 6).
void write_report_text(std::ostream& out, const EvalReport& report);
/// Deterministic machine-readable JSON; excludes wall-clock timings.
void write_report_json(std::ostream& out, const EvalReport& report);
/// "fold_<i>_seconds=..." lines plus the total; the non-deterministic part.
void write_timings_text(std::ostream& out, const EvalReport& report);

/// Aligned table at 4 significant digits, columns ordered by average rank.
void write_rank_table_text(std::ostream& out, const RankTable& table);
/// Comma-separated at 17 significant digits, same column order.
void write_rank_table_csv(std::ostream& out, const RankTable& table);

} // namespace kcml

#endif
