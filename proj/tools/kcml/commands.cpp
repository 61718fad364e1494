#include "kcml/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kcml/error.hpp"
#include "kcml/eval.hpp"
#include "kcml/format.hpp"

namespace fs = std::filesystem;

namespace kcml::cli {
namespace {

// Interrupted runs must never leave truncated files: write aside, then rename.
void atomic_write(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path temp = path.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot write " + temp.string());
        out << content;
    }
    fs::rename(temp, path);
}

Dataset load_one(const std::string& path, const Options& options) {
    std::string format = options.format;
    if (format == "auto") {
        const std::string ext = fs::path(path).extension().string();
        if (ext == ".csv") format = "csv";
        else if (ext == ".libsvm" || ext == ".svm") format = "libsvm";
        else throw argument_error("cannot infer format of '" + path + "'; pass --format");
    }
    Dataset data;
    if (format == "csv") {
        CsvOptions csv;
        csv.label_column = options.label_column;
        data = load_csv(path, csv);
    } else if (format == "libsvm") {
        data = load_libsvm(path);
    } else {
        throw argument_error("unknown format '" + format + "'");
    }
    if (options.subsample > 0 && options.subsample < data.size())
        data = subsample_stratified(data, options.subsample, options.seed);
    return data;
}

EvalConfig make_config(const Options& options, const std::string& method_name) {
    const auto method = parse_method(method_name);
    if (!method) throw argument_error("unknown method '" + method_name + "'");
    EvalConfig config;
    config.method = *method;
    config.m1 = options.m1;
    config.m2 = options.m2;
    config.C = options.C;
    config.k = options.k;
    config.pca_dim = options.pca;
    config.standardize = !options.no_standardize;
    config.raw_metric = options.raw_metric;
    config.tolerance = options.tolerance;
    config.max_passes = options.max_passes;
    config.seed = options.seed;
    config.folds = options.folds;
    config.klr_ridge = options.klr_ridge;
    config.klr_max_iter = options.klr_max_iter;
    config.threads = options.threads;
    return config;
}

std::vector<std::pair<std::string, std::string>> run_info(const Options& options,
                                                          const std::string& data_path) {
    std::vector<std::pair<std::string, std::string>> info;
    info.emplace_back("command", options.command);
    info.emplace_back("data", data_path);
    info.emplace_back("format", options.format);
    info.emplace_back("label_column", std::to_string(options.label_column));
    info.emplace_back("subsample", std::to_string(options.subsample));
    if (!options.test_data.empty()) info.emplace_back("test_data", options.test_data);
    return info;
}

std::string to_string_stream(const auto& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

void write_report_files(const fs::path& dir, const std::string& stem, const EvalReport& report) {
    atomic_write(dir / (stem + ".report.txt"),
                 to_string_stream([&](std::ostream& o) { write_report_text(o, report); }));
    atomic_write(dir / (stem + ".report.json"),
                 to_string_stream([&](std::ostream& o) { write_report_json(o, report); }));
    atomic_write(dir / (stem + ".timings.txt"),
                 to_string_stream([&](std::ostream& o) { write_timings_text(o, report); }));
}

std::string train_report_text(const TrainResult& result, const EvalConfig& config,
                              const Options& options, const std::string& data_path,
                              bool with_timing) {
    std::ostringstream out;
    out << "command=" << options.command << '\n';
    out << "data=" << data_path << '\n';
    out << "method=" << method_name(config.method) << '\n';
    out << "m1=" << config.m1 << '\n';
    out << "m2=" << config.m2 << '\n';
    out << "C=" << format_significant(config.C, 17) << '\n';
    out << "pca_dim=" << config.pca_dim << '\n';
    out << "standardize=" << (config.standardize ? 1 : 0) << '\n';
    out << "tolerance=" << format_significant(config.tolerance, 17) << '\n';
    out << "max_passes=" << config.max_passes << '\n';
    out << "seed=" << config.seed << '\n';
    out << "constraints=" << result.constraint_count << '\n';
    out << "dropped_constraints=" << result.dropped_constraints << '\n';
    if (config.method == Method::doublet_klr) {
        out << "log_likelihood=" << format_significant(result.klr.log_likelihood, 17) << '\n';
        out << "gradient_norm=" << format_significant(result.klr.gradient_norm, 17) << '\n';
        out << "iterations=" << result.klr.iterations << '\n';
        out << "converged=" << (result.klr.converged ? 1 : 0) << '\n';
    } else {
        out << "dual_objective=" << format_significant(result.dual.dual_objective, 17) << '\n';
        out << "kkt_violation=" << format_significant(result.dual.kkt_violation, 17) << '\n';
        out << "support_count=" << result.dual.support_count << '\n';
        out << "iterations=" << result.dual.iterations << '\n';
        if (config.method == Method::doublet_svm)
            out << "bias_b=" << format_significant(result.dual.bias_b, 17) << '\n';
    }
    out << "dropped_eigenvalue_mass="
        << format_significant(result.projected.dropped_eigenvalue_mass, 17) << '\n';
    if (with_timing)
        out << "train_seconds=" << format_significant(result.train_seconds, 6) << '\n';
    return out.str();
}

TrainResult train_once(const Options& options, const std::string& method_name_str,
                       const Dataset& data) {
    EvalConfig config = make_config(options, method_name_str);
    std::ofstream trace;
    if (!options.trace_path.empty()) {
        trace.open(options.trace_path, std::ios::trunc);
        if (!trace) throw error("cannot open trace file " + options.trace_path);
        config.solver_trace = &trace;
    }
    TrainResult result = train_metric(data, config);
    if (result.dropped_constraints > 0)
        std::cerr << "warning: dropped " << result.dropped_constraints
                  << " degenerate constraints (duplicate points)\n";
    return result;
}

} // namespace

int cmd_train(const Options& options) {
    if (options.data.size() != 1) throw argument_error("train expects exactly one --data file");
    const Dataset data = load_one(options.data[0], options);
    const EvalConfig config = make_config(options, options.methods.at(0));
    const TrainResult result = train_once(options, options.methods.at(0), data);

    const fs::path dir(options.out);
    atomic_write(dir / "metric.txt", to_string_stream([&](std::ostream& o) {
                     write_metric(o, result.projected);
                 }));
    atomic_write(dir / "metric_raw.txt",
                 to_string_stream([&](std::ostream& o) { write_metric(o, result.raw); }));
    if (config.pca_dim > 0)
        atomic_write(dir / "pca.txt",
                     to_string_stream([&](std::ostream& o) { write_pca(o, result.pca); }));
    atomic_write(dir / "train_report.txt",
                 train_report_text(result, config, options, options.data[0], true));
    // the machine copy omits wall-clock timing so reruns are byte-identical
    nlohmann::ordered_json j;
    j["schema"] = "kcml-train-report/1";
    j["command"] = options.command;
    j["data"] = options.data[0];
    j["method"] = method_name(config.method);
    j["m1"] = config.m1;
    j["m2"] = config.m2;
    j["C"] = config.C;
    j["pca_dim"] = config.pca_dim;
    j["standardize"] = config.standardize;
    j["tolerance"] = config.tolerance;
    j["max_passes"] = config.max_passes;
    j["seed"] = config.seed;
    j["constraints"] = result.constraint_count;
    j["dropped_constraints"] = result.dropped_constraints;
    if (config.method == Method::doublet_klr) {
        j["log_likelihood"] = result.klr.log_likelihood;
        j["gradient_norm"] = result.klr.gradient_norm;
        j["iterations"] = result.klr.iterations;
        j["converged"] = result.klr.converged;
    } else {
        j["dual_objective"] = result.dual.dual_objective;
        j["kkt_violation"] = result.dual.kkt_violation;
        j["support_count"] = result.dual.support_count;
        j["iterations"] = result.dual.iterations;
        if (config.method == Method::doublet_svm) j["bias_b"] = result.dual.bias_b;
    }
    j["dropped_eigenvalue_mass"] = result.projected.dropped_eigenvalue_mass;
    atomic_write(dir / "train_report.json", j.dump(2) + "\n");
    std::cout << "wrote " << (dir / "metric.txt").string() << '\n';
    return 0;
}

int cmd_evaluate(const Options& options) {
    if (options.data.size() != 1) throw argument_error("evaluate expects exactly one --data file");
    const Dataset data = load_one(options.data[0], options);
    const EvalConfig config = make_config(options, options.methods.at(0));

    EvalReport report;
    if (options.test_data.empty()) {
        const CvSplit split = kfold_split(data, config.folds, config.seed);
        report = run_cv(data, config, split);
    } else {
        const Dataset test = load_one(options.test_data, options);
        report = run_holdout(data, test, config);
    }
    report.run_info = run_info(options, options.data[0]);

    write_report_files(fs::path(options.out), data.name + "__" + report.method, report);
    std::cout << "mean_error=" << format_significant(report.mean_error, 6) << '\n';
    return 0;
}

int cmd_benchmark(const Options& options) {
    if (options.data.empty()) throw argument_error("benchmark needs at least one --data file");
    const fs::path dir(options.out);

    std::vector<std::string> dataset_names;
    Matrix errors(options.data.size(), options.methods.size(), 0.0);
    bool any_failed = false;

    for (std::size_t d = 0; d < options.data.size(); ++d) {
        std::string name = fs::path(options.data[d]).stem().string();
        dataset_names.push_back(name);
        for (std::size_t m = 0; m < options.methods.size(); ++m) {
            try {
                const Dataset data = load_one(options.data[d], options);
                const EvalConfig config = make_config(options, options.methods[m]);
                const CvSplit split = kfold_split(data, config.folds, config.seed);
                EvalReport report = run_cv(data, config, split);
                report.run_info = run_info(options, options.data[d]);
                write_report_files(dir, data.name + "__" + report.method, report);
                errors(d, m) = report.mean_error;
            } catch (const std::exception& e) {
                std::cerr << "error: " << options.data[d] << " / " << options.methods[m] << ": "
                          << e.what() << '\n';
                errors(d, m) = std::numeric_limits<double>::quiet_NaN();
                any_failed = true;
            }
        }
    }

    // rank rows must be complete: drop datasets with failures from the table
    std::vector<std::string> complete_names;
    std::vector<std::size_t> complete_rows;
    for (std::size_t d = 0; d < dataset_names.size(); ++d) {
        bool complete = true;
        for (std::size_t m = 0; m < options.methods.size(); ++m)
            if (std::isnan(errors(d, m))) complete = false;
        if (complete) {
            complete_names.push_back(dataset_names[d]);
            complete_rows.push_back(d);
        }
    }
    if (!complete_rows.empty()) {
        Matrix kept(complete_rows.size(), options.methods.size());
        for (std::size_t r = 0; r < complete_rows.size(); ++r)
            for (std::size_t m = 0; m < options.methods.size(); ++m)
                kept(r, m) = errors(complete_rows[r], m);
        const RankTable table = average_rank(options.methods, complete_names, kept);
        atomic_write(dir / "rank_table.txt",
                     to_string_stream([&](std::ostream& o) { write_rank_table_text(o, table); }));
        atomic_write(dir / "rank_table.csv",
                     to_string_stream([&](std::ostream& o) { write_rank_table_csv(o, table); }));
        std::cout << to_string_stream([&](std::ostream& o) { write_rank_table_text(o, table); });
    }
    return any_failed ? 1 : 0;
}

int cmd_sweep(const Options& options) {
    if (options.data.size() != 1) throw argument_error("sweep expects exactly one --data file");
    const Dataset data = load_one(options.data[0], options);
    const EvalConfig base = make_config(options, options.methods.at(0));
    const CvSplit split = kfold_split(data, base.folds, base.seed);

    const std::vector<int> m1_grid = options.m1_grid.empty() ? std::vector<int>{options.m1}
                                                             : options.m1_grid;
    const std::vector<int> m2_grid = options.m2_grid.empty() ? std::vector<int>{options.m2}
                                                             : options.m2_grid;
    const std::vector<double> c_grid = options.c_grid.empty() ? std::vector<double>{options.C}
                                                              : options.c_grid;

    struct SweepRow {
        int m1;
        int m2;
        double C;
        double mean_error;
    };
    std::vector<SweepRow> rows;
    for (int m1 : m1_grid) {
        for (int m2 : m2_grid) {
            EvalConfig config = base;
            config.m1 = m1;
            config.m2 = m2;
            if (base.method == Method::doublet_klr) {
                for (double c : c_grid) {
                    config.C = c;
                    const EvalReport report = run_cv(data, config, split);
                    rows.push_back({m1, m2, c, report.mean_error});
                }
            } else {
                const std::vector<double> means = run_cv_c_grid(data, config, split, c_grid);
                for (std::size_t ci = 0; ci < c_grid.size(); ++ci)
                    rows.push_back({m1, m2, c_grid[ci], means[ci]});
            }
        }
    }

    std::ostringstream csv;
    csv << "# command=sweep data=" << options.data[0] << " method=" << options.methods.at(0)
        << " k=" << options.k << " folds=" << options.folds << " seed=" << options.seed
        << " pca=" << options.pca << " standardize=" << (options.no_standardize ? 0 : 1)
        << " tolerance=" << format_significant(options.tolerance, 17) << '\n';
    csv << "m1,m2,C,mean_error\n";
    for (const auto& row : rows)
        csv << row.m1 << ',' << row.m2 << ',' << format_significant(row.C, 17) << ','
            << format_significant(row.mean_error, 17) << '\n';
    atomic_write(fs::path(options.out) / "sweep.csv", csv.str());

    std::ostringstream table;
    table << "m1    m2    C         mean_error\n";
    for (const auto& row : rows) {
        std::string c_text = format_significant(row.C, 4);
        c_text.resize(std::max<std::size_t>(c_text.size(), 9), ' ');
        table << row.m1 << "     " << row.m2 << "     " << c_text << ' '
              << format_significant(row.mean_error, 4) << '\n';
    }
    atomic_write(fs::path(options.out) / "sweep.txt", table.str());
    std::cout << table.str();
    return 0;
}

int cmd_export_metric(const Options& options) {
    if (options.data.size() != 1)
        throw argument_error("export-metric expects exactly one --data file");
    const Dataset data = load_one(options.data[0], options);
    const TrainResult result = train_once(options, options.methods.at(0), data);
    const MetricMatrix& metric = options.raw_metric ? result.raw : result.projected;
    atomic_write(fs::path(options.out),
                 to_string_stream([&](std::ostream& o) { write_metric(o, metric); }));
    std::cout << "wrote " << options.out << '\n';
    return 0;
}

} // namespace kcml::cli
