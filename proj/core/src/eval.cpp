#include "kcml/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "kcml/error.hpp"
#include "kcml/format.hpp"

namespace kcml {
namespace {

using ordered_json = nlohmann::ordered_json;

struct FoldOutcome {
    double error = 0.0;
    double train_seconds = 0.0;
    std::size_t constraints = 0;
};

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.name = data.name;
    out.label_names = data.label_names;
    out.samples.reserve(rows.size());
    for (std::size_t idx : rows) out.samples.push_back(data.samples[idx]);
    return out;
}

FoldOutcome evaluate_fold(const Dataset& train_raw, const Dataset& test_raw,
                          const EvalConfig& config) {
    Dataset train = train_raw;
    Dataset test = test_raw;
    if (config.standardize) {
        const StandardizeParams params = standardize_fit(train);
        train = standardize_apply(params, train);
        test = standardize_apply(params, test);
    }
    if (config.pca_dim > 0) {
        const PcaModel model = pca_fit(train, config.pca_dim);
        train = pca_transform(model, train);
        test = pca_transform(model, test);
    }

    const TrainResult trained = train_metric_preprocessed(train, config);
    const MetricMatrix& metric = config.raw_metric ? trained.raw : trained.projected;

    std::vector<int> predictions, truths;
    predictions.reserve(test.size());
    truths.reserve(test.size());
    for (const auto& sample : test.samples) {
        predictions.push_back(knn_classify(metric, train, sample.features, config.k));
        truths.push_back(sample.label);
    }

    FoldOutcome outcome;
    outcome.error = error_rate(predictions, truths);
    outcome.train_seconds = trained.train_seconds;
    outcome.constraints = trained.constraint_count;
    return outcome;
}

ordered_json config_json(const EvalConfig& config) {
    ordered_json j;
    j["method"] = method_name(config.method);
    j["m1"] = config.m1;
    j["m2"] = config.m2;
    j["C"] = config.C;
    j["k"] = config.k;
    j["pca_dim"] = config.pca_dim;
    j["standardize"] = config.standardize;
    j["raw_metric"] = config.raw_metric;
    j["tolerance"] = config.tolerance;
    j["max_passes"] = config.max_passes;
    j["seed"] = config.seed;
    j["folds"] = config.folds;
    j["klr_ridge"] = config.klr_ridge;
    j["klr_max_iter"] = config.klr_max_iter;
    return j;
}

void write_config_text(std::ostream& out, const EvalConfig& config) {
    out << "method=" << method_name(config.method) << '\n';
    out << "m1=" << config.m1 << '\n';
    out << "m2=" << config.m2 << '\n';
    out << "C=" << format_significant(config.C, 17) << '\n';
    out << "k=" << config.k << '\n';
    out << "pca_dim=" << config.pca_dim << '\n';
    out << "standardize=" << (config.standardize ? 1 : 0) << '\n';
    out << "raw_metric=" << (config.raw_metric ? 1 : 0) << '\n';
    out << "tolerance=" << format_significant(config.tolerance, 17) << '\n';
    out << "max_passes=" << config.max_passes << '\n';
    out << "seed=" << config.seed << '\n';
    out << "folds=" << config.folds << '\n';
    out << "klr_ridge=" << format_significant(config.klr_ridge, 17) << '\n';
    out << "klr_max_iter=" << config.klr_max_iter << '\n';
}

std::vector<std::size_t> rank_order(const RankTable& table) {
    std::vector<std::size_t> order(table.methods.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.average_rank[a] < table.average_rank[b];
    });
    return order;
}

} // namespace

std::string method_name(Method method) {
    switch (method) {
    case Method::doublet_svm: return "doublet-svm";
    case Method::triplet_svm: return "triplet-svm";
    case Method::doublet_klr: return "doublet-klr";
    }
    return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
    if (name == "doublet-svm") return Method::doublet_svm;
    if (name == "triplet-svm") return Method::triplet_svm;
    if (name == "doublet-klr") return Method::doublet_klr;
    return std::nullopt;
}

/// Trains on data as-is (no standardize/PCA); used once preprocessing ran.
TrainResult train_metric_preprocessed(const Dataset& data, const EvalConfig& config) {
    TrainResult result;
    result.method = config.method;

    SolverConfig solver_config;
    solver_config.C = config.C;
    solver_config.tolerance = config.tolerance;
    solver_config.max_passes = config.max_passes;
    solver_config.seed = config.seed;
    solver_config.trace = config.solver_trace;

    using clock = std::chrono::steady_clock;
    if (config.method == Method::triplet_svm) {
        const TripletSet triplets = build_triplets(data, config.m1, config.m2);
        const GramView view = gram(triplets, config.gram);
        const auto t0 = clock::now();
        result.dual = solve_triplet_svm(view, solver_config);
        result.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        result.raw = reconstruct_triplet_metric(result.dual, triplets);
        result.constraint_count = triplets.size();
        result.dropped_constraints = triplets.dropped_degenerate;
    } else {
        const DoubletSet doublets = build_doublets(data, config.m1, config.m2);
        const GramView view = gram(doublets, config.gram);
        if (config.method == Method::doublet_svm) {
            std::vector<int> labels;
            labels.reserve(doublets.size());
            for (const auto& z : doublets.items) labels.push_back(z.label_h);
            const auto t0 = clock::now();
            result.dual = solve_doublet_svm(view, labels, solver_config);
            result.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
            result.raw = reconstruct_doublet_metric(result.dual, doublets);
        } else {
            const std::vector<int> labels = doublet_labels01(doublets);
            KlrConfig klr_config;
            klr_config.max_iter = config.klr_max_iter;
            klr_config.ridge = config.klr_ridge;
            const auto t0 = clock::now();
            result.klr = fit_doublet_klr(view, labels, klr_config);
            result.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
            result.raw = reconstruct_klr_metric(result.klr, doublets);
        }
        result.constraint_count = doublets.size();
        result.dropped_constraints = doublets.dropped_zero_diff;
    }
    result.projected = psd_project(result.raw);
    return result;
}

TrainResult train_metric(const Dataset& data, const EvalConfig& config) {
    Dataset prepared = data;
    StandardizeParams standardize;
    PcaModel pca;
    if (config.standardize) {
        standardize = standardize_fit(prepared);
        prepared = standardize_apply(standardize, prepared);
    }
    if (config.pca_dim > 0) {
        pca = pca_fit(prepared, config.pca_dim);
        prepared = pca_transform(pca, prepared);
    }
    TrainResult result = train_metric_preprocessed(prepared, config);
    result.standardize = std::move(standardize);
    result.pca = std::move(pca);
    return result;
}

int knn_classify(const MetricMatrix& metric, const Dataset& train, std::span<const double> query,
                 int k) {
    if (train.samples.empty()) throw argument_error("knn_classify: empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.size())
        throw argument_error("knn_classify: k must be in [1, train size]");

    std::vector<std::pair<double, std::size_t>> distances;
    distances.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        distances.emplace_back(mahalanobis(metric, query, train.samples[i].features), i);
    std::partial_sort(distances.begin(), distances.begin() + k, distances.end());

    // votes + first position of each label among the k nearest
    std::map<int, std::pair<int, int>> votes; // label -> (count, first rank)
    for (int r = 0; r < k; ++r) {
        const int label = train.samples[distances[r].second].label;
        auto it = votes.find(label);
        if (it == votes.end())
            votes.emplace(label, std::make_pair(1, r));
        else
            ++it->second.first;
    }
    int best_label = 0, best_count = -1, best_rank = k;
    for (const auto& [label, info] : votes) {
        const auto [count, rank] = info;
        if (count > best_count || (count == best_count && rank < best_rank) ||
            (count == best_count && rank == best_rank && label < best_label)) {
            best_label = label;
            best_count = count;
            best_rank = rank;
        }
    }
    return best_label;
}

double error_rate(std::span<const int> predictions, std::span<const int> truths) {
    if (predictions.empty()) throw argument_error("error_rate: empty inputs");
    if (predictions.size() != truths.size()) throw argument_error("error_rate: size mismatch");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] != truths[i]) ++mismatches;
    return 100.0 * static_cast<double>(mismatches) / static_cast<double>(predictions.size());
}

EvalReport run_cv(const Dataset& data, const EvalConfig& config, const CvSplit& split) {
    if (split.assignments.size() != data.size())
        throw argument_error("run_cv: split does not match dataset");
    if (split.fold_count < 2) throw argument_error("run_cv: need at least 2 folds");

    const int folds = split.fold_count;
    std::vector<std::vector<std::size_t>> train_rows(folds), test_rows(folds);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int f = 0; f < folds; ++f)
            (split.assignments[i] == f ? test_rows[f] : train_rows[f]).push_back(i);
    }

    std::vector<FoldOutcome> outcomes(folds);
    std::vector<std::string> failures(folds);
    const std::size_t workers =
        config.threads > 0 ? static_cast<std::size_t>(config.threads)
                           : std::max<std::size_t>(1, std::thread::hardware_concurrency());

    std::atomic<int> next_fold{0};
    auto worker = [&] {
        for (int f = next_fold.fetch_add(1); f < folds; f = next_fold.fetch_add(1)) {
            try {
                outcomes[f] = evaluate_fold(take_rows(data, train_rows[f]),
                                            take_rows(data, test_rows[f]), config);
            } catch (const std::exception& e) {
                failures[f] = e.what();
            }
        }
    };
    if (workers <= 1 || folds == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min<std::size_t>(workers, folds); ++w)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (int f = 0; f < folds; ++f)
        if (!failures[f].empty())
            throw error("fold " + std::to_string(f) + ": " + failures[f]);

    EvalReport report;
    report.dataset = data.name;
    report.method = method_name(config.method);
    report.config = config;
    report.label_names = data.label_names;
    for (int f = 0; f < folds; ++f) {
        report.fold_errors.push_back(outcomes[f].error);
        report.fold_constraints.push_back(outcomes[f].constraints);
        report.fold_train_seconds.push_back(outcomes[f].train_seconds);
        report.mean_error += outcomes[f].error;
        report.total_train_seconds += outcomes[f].train_seconds;
    }
    report.mean_error /= folds;
    return report;
}

EvalReport run_holdout(const Dataset& train, const Dataset& test, const EvalConfig& config) {
    if (train.dim() != test.dim()) throw argument_error("run_holdout: dimension mismatch");
    const FoldOutcome outcome = evaluate_fold(train, test, config);

    EvalReport report;
    report.dataset = train.name;
    report.method = method_name(config.method);
    report.config = config;
    report.config.folds = 1;
    report.label_names = train.label_names;
    report.fold_errors.push_back(outcome.error);
    report.fold_constraints.push_back(outcome.constraints);
    report.fold_train_seconds.push_back(outcome.train_seconds);
    report.mean_error = outcome.error;
    report.total_train_seconds = outcome.train_seconds;
    return report;
}

std::vector<double> run_cv_c_grid(const Dataset& data, const EvalConfig& base,
                                  const CvSplit& split, std::span<const double> c_values) {
    if (base.method == Method::doublet_klr)
        throw argument_error("run_cv_c_grid: C grids apply to the SVM methods only");
    if (c_values.empty()) throw argument_error("run_cv_c_grid: empty C grid");
    if (split.assignments.size() != data.size())
        throw argument_error("run_cv_c_grid: split does not match dataset");

    const int folds = split.fold_count;
    std::vector<std::vector<std::size_t>> train_rows(folds), test_rows(folds);
    for (std::size_t i = 0; i < data.size(); ++i)
        for (int f = 0; f < folds; ++f)
            (split.assignments[i] == f ? test_rows[f] : train_rows[f]).push_back(i);

    Matrix errors(folds, c_values.size(), 0.0);
    std::vector<std::string> failures(folds);
    std::atomic<int> next_fold{0};
    auto worker = [&] {
        for (int f = next_fold.fetch_add(1); f < folds; f = next_fold.fetch_add(1)) {
            try {
                Dataset train = take_rows(data, train_rows[f]);
                Dataset test = take_rows(data, test_rows[f]);
                if (base.standardize) {
                    const StandardizeParams params = standardize_fit(train);
                    train = standardize_apply(params, train);
                    test = standardize_apply(params, test);
                }
                if (base.pca_dim > 0) {
                    const PcaModel model = pca_fit(train, base.pca_dim);
                    train = pca_transform(model, train);
                    test = pca_transform(model, test);
                }

                SolverConfig solver_config;
                solver_config.tolerance = base.tolerance;
                solver_config.max_passes = base.max_passes;
                solver_config.seed = base.seed;

                DoubletSet doublets;
                TripletSet triplets;
                GramView view = [&] {
                    if (base.method == Method::triplet_svm) {
                        triplets = build_triplets(train, base.m1, base.m2);
                        return gram(triplets, base.gram);
                    }
                    doublets = build_doublets(train, base.m1, base.m2);
                    return gram(doublets, base.gram);
                }();
                std::vector<int> labels;
                for (const auto& z : doublets.items) labels.push_back(z.label_h);

                for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
                    solver_config.C = c_values[ci];
                    MetricMatrix metric;
                    if (base.method == Method::triplet_svm)
                        metric = reconstruct_triplet_metric(solve_triplet_svm(view, solver_config),
                                                            triplets);
                    else
                        metric = reconstruct_doublet_metric(
                            solve_doublet_svm(view, labels, solver_config), doublets);
                    if (!base.raw_metric) metric = psd_project(metric);

                    std::vector<int> predictions, truths;
                    for (const auto& sample : test.samples) {
                        predictions.push_back(knn_classify(metric, train, sample.features, base.k));
                        truths.push_back(sample.label);
                    }
                    errors(f, ci) = error_rate(predictions, truths);
                }
            } catch (const std::exception& e) {
                failures[f] = e.what();
            }
        }
    };
    const std::size_t workers =
        base.threads > 0 ? static_cast<std::size_t>(base.threads)
                         : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (workers <= 1 || folds == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min<std::size_t>(workers, folds); ++w)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (int f = 0; f < folds; ++f)
        if (!failures[f].empty()) throw error("fold " + std::to_string(f) + ": " + failures[f]);

    std::vector<double> means(c_values.size(), 0.0);
    for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
        for (int f = 0; f < folds; ++f) means[ci] += errors(f, ci);
        means[ci] /= folds;
    }
    return means;
}

RankTable average_rank(const std::vector<std::string>& methods,
                       const std::vector<std::string>& datasets, const Matrix& errors,
                       TiePolicy ties) {
    if (methods.empty() || datasets.empty()) throw argument_error("average_rank: empty table");
    if (errors.rows() != datasets.size() || errors.cols() != methods.size())
        throw argument_error("average_rank: table shape mismatch");

    RankTable table;
    table.methods = methods;
    table.datasets = datasets;
    table.errors = errors;
    table.ranks = Matrix(datasets.size(), methods.size(), 0.0);
    table.average_rank.assign(methods.size(), 0.0);

    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            std::size_t strictly_better = 0, equal = 0;
            for (std::size_t other = 0; other < methods.size(); ++other) {
                if (errors(d, other) < errors(d, m)) ++strictly_better;
                else if (errors(d, other) == errors(d, m)) ++equal; // includes self
            }
            double rank = static_cast<double>(strictly_better) + 1.0;
            if (ties == TiePolicy::averaged) rank += 0.5 * static_cast<double>(equal - 1);
            table.ranks(d, m) = rank;
        }
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (std::size_t d = 0; d < datasets.size(); ++d)
            table.average_rank[m] += table.ranks(d, m);
        table.average_rank[m] /= static_cast<double>(datasets.size());
    }
    return table;
}

void write_report_text(std::ostream& out, const EvalReport& report) {
    out << "dataset=" << report.dataset << '\n';
    for (const auto& [key, value] : report.run_info) out << "run_" << key << '=' << value << '\n';
    write_config_text(out, report.config);
    if (!report.label_names.empty()) {
        out << "label_names=";
        for (std::size_t i = 0; i < report.label_names.size(); ++i)
            out << (i ? "," : "") << report.label_names[i];
        out << '\n';
    }
    for (std::size_t f = 0; f < report.fold_errors.size(); ++f) {
        out << "fold_" << f << "_error=" << format_significant(report.fold_errors[f], 17) << '\n';
        out << "fold_" << f << "_constraints=" << report.fold_constraints[f] << '\n';
        out << "fold_" << f << "_seconds=" << format_significant(report.fold_train_seconds[f], 6)
            << '\n';
    }
    out << "mean_error=" << format_significant(report.mean_error, 17) << '\n';
    out << "total_train_seconds=" << format_significant(report.total_train_seconds, 6) << '\n';
}

void write_report_json(std::ostream& out, const EvalReport& report) {
    ordered_json j;
    j["schema"] = "kcml-eval-report/1";
    j["dataset"] = report.dataset;
    j["method"] = report.method;
    j["params"] = config_json(report.config);
    if (!report.run_info.empty()) {
        ordered_json run;
        for (const auto& [key, value] : report.run_info) run[key] = value;
        j["run"] = run;
    }
    j["label_names"] = report.label_names;
    ordered_json folds = ordered_json::array();
    for (std::size_t f = 0; f < report.fold_errors.size(); ++f) {
        ordered_json fold;
        fold["fold"] = f;
        fold["error"] = report.fold_errors[f];
        fold["constraints"] = report.fold_constraints[f];
        folds.push_back(fold);
    }
    j["folds"] = folds;
    j["mean_error"] = report.mean_error;
    out << j.dump(2) << '\n';
}

void write_timings_text(std::ostream& out, const EvalReport& report) {
    for (std::size_t f = 0; f < report.fold_train_seconds.size(); ++f)
        out << "fold_" << f << "_seconds=" << format_significant(report.fold_train_seconds[f], 6)
            << '\n';
    out << "total_train_seconds=" << format_significant(report.total_train_seconds, 6) << '\n';
}

void write_rank_table_text(std::ostream& out, const RankTable& table) {
    const std::vector<std::size_t> order = rank_order(table);

    std::size_t name_width = std::string("average_rank").size();
    for (const auto& name : table.datasets) name_width = std::max(name_width, name.size());
    std::vector<std::size_t> widths(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        widths[c] = table.methods[order[c]].size();
        for (std::size_t d = 0; d < table.datasets.size(); ++d)
            widths[c] = std::max(widths[c],
                                 format_significant(table.errors(d, order[c]), 4).size());
    }
    auto pad = [&out](const std::string& text, std::size_t width) {
        out << text << std::string(width - std::min(width, text.size()), ' ');
    };

    pad("", name_width);
    for (std::size_t c = 0; c < order.size(); ++c) {
        out << "  ";
        pad(table.methods[order[c]], widths[c]);
    }
    out << '\n';
    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        pad(table.datasets[d], name_width);
        for (std::size_t c = 0; c < order.size(); ++c) {
            out << "  ";
            pad(format_significant(table.errors(d, order[c]), 4), widths[c]);
        }
        out << '\n';
    }
    pad("average_rank", name_width);
    for (std::size_t c = 0; c < order.size(); ++c) {
        out << "  ";
        pad(format_significant(table.average_rank[order[c]], 4), widths[c]);
    }
    out << '\n';
}

void write_rank_table_csv(std::ostream& out, const RankTable& table) {
    const std::vector<std::size_t> order = rank_order(table);
    out << "dataset";
    for (std::size_t m : order) out << ',' << table.methods[m];
    out << '\n';
    for (std::size_t d = 0; d < table.datasets.size(); ++d) {
        out << table.datasets[d];
        for (std::size_t m : order) out << ',' << format_significant(table.errors(d, m), 17);
        out << '\n';
    }
    out << "average_rank";
    for (std::size_t m : order) out << ',' << format_significant(table.average_rank[m], 17);
    out << '\n';
}

} // namespace kcml
