#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kcml/commands.hpp"
#include "kcml/error.hpp"

namespace {

// Plain key=value config file; values apply only where no flag was passed.
void apply_config_file(const CLI::App* cmd, kcml::cli::Options& options) {
    std::ifstream in(options.config_path);
    if (!in) throw kcml::argument_error("cannot open config file " + options.config_path);

    auto passed = [cmd](const std::string& flag) {
        const CLI::Option* option = cmd->get_option_no_throw(flag);
        return option != nullptr && option->count() > 0;
    };
    auto split_csv = [](const std::string& value) {
        std::vector<std::string> parts;
        std::istringstream stream(value);
        std::string part;
        while (std::getline(stream, part, ',')) parts.push_back(part);
        return parts;
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw kcml::argument_error(options.config_path + ": line " +
                                       std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        const std::string flag = "--" + key;
        if (passed(flag)) continue; // command line wins

        try {
            if (key == "data") options.data = split_csv(value);
            else if (key == "test-data") options.test_data = value;
            else if (key == "format") options.format = value;
            else if (key == "label-col") options.label_column = std::stoi(value);
            else if (key == "method") options.methods = split_csv(value);
            else if (key == "m1") options.m1 = std::stoi(value);
            else if (key == "m2") options.m2 = std::stoi(value);
            else if (key == "c") options.C = std::stod(value);
            else if (key == "k") options.k = std::stoi(value);
            else if (key == "pca") options.pca = std::stoul(value);
            else if (key == "folds") options.folds = std::stoi(value);
            else if (key == "seed") options.seed = std::stoull(value);
            else if (key == "tol") options.tolerance = std::stod(value);
            else if (key == "max-passes") options.max_passes = std::stoul(value);
            else if (key == "out") options.out = value;
            else if (key == "no-standardize") options.no_standardize = std::stoi(value) != 0;
            else if (key == "raw-metric") options.raw_metric = std::stoi(value) != 0;
            else if (key == "threads") options.threads = std::stoi(value);
            else if (key == "subsample") options.subsample = std::stoul(value);
            else if (key == "klr-ridge") options.klr_ridge = std::stod(value);
            else if (key == "klr-max-iter") options.klr_max_iter = std::stoul(value);
            else if (key == "trace") options.trace_path = value;
            else if (key == "m1-grid" || key == "m2-grid" || key == "c-grid") {
                auto& grid_int = key == "m1-grid" ? options.m1_grid : options.m2_grid;
                if (key == "c-grid") {
                    options.c_grid.clear();
                    for (const auto& part : split_csv(value))
                        options.c_grid.push_back(std::stod(part));
                } else {
                    grid_int.clear();
                    for (const auto& part : split_csv(value))
                        grid_int.push_back(std::stoi(part));
                }
            } else {
                throw kcml::argument_error(options.config_path + ": unknown key '" + key + "'");
            }
        } catch (const kcml::argument_error&) {
            throw;
        } catch (const std::exception&) {
            throw kcml::argument_error(options.config_path + ": line " +
                                       std::to_string(line_no) + ": bad value for '" + key + "'");
        }
    }
}

void add_common_options(CLI::App* cmd, kcml::cli::Options& options, bool multi_data,
                        bool multi_method) {
    auto* data = cmd->add_option("--data", options.data, "dataset file(s)");
    if (!multi_data) data->expected(1);
    cmd->add_option("--format", options.format, "auto | csv | libsvm")->capture_default_str();
    cmd->add_option("--label-col", options.label_column,
                    "csv label column index, -1 = last column")
        ->capture_default_str();
    auto* method = cmd->add_option("--method", options.methods,
                                   "doublet-svm | triplet-svm | doublet-klr");
    if (!multi_method) method->expected(1);
    cmd->add_option("--m1", options.m1, "same-class neighbors per sample")->capture_default_str();
    cmd->add_option("--m2", options.m2, "different-class neighbors per sample")
        ->capture_default_str();
    cmd->add_option("--c", options.C, "SVM box bound C")->capture_default_str();
    cmd->add_option("--k", options.k, "k-NN neighborhood size")->capture_default_str();
    cmd->add_option("--pca", options.pca, "PCA dimension, 0 = off")->capture_default_str();
    cmd->add_option("--folds", options.folds, "cross-validation folds")->capture_default_str();
    cmd->add_option("--seed", options.seed, "seed for splits and subsampling")
        ->capture_default_str();
    cmd->add_option("--tol", options.tolerance, "solver KKT tolerance")->capture_default_str();
    cmd->add_option("--max-passes", options.max_passes, "solver update budget per constraint")
        ->capture_default_str();
    cmd->add_option("--out", options.out, "output directory (file for export-metric)")
        ->capture_default_str();
    cmd->add_flag("--no-standardize", options.no_standardize,
                  "skip per-fold feature standardization");
    cmd->add_flag("--raw-metric", options.raw_metric, "use the unprojected metric in k-NN");
    cmd->add_option("--threads", options.threads, "fold parallelism, 0 = hardware")
        ->capture_default_str();
    cmd->add_option("--subsample", options.subsample,
                    "stratified subsample size applied after loading, 0 = off")
        ->capture_default_str();
    cmd->add_option("--klr-ridge", options.klr_ridge, "optional ridge penalty for doublet-klr")
        ->capture_default_str();
    cmd->add_option("--klr-max-iter", options.klr_max_iter, "doublet-klr iteration cap")
        ->capture_default_str();
    cmd->add_option("--config", options.config_path,
                    "plain key=value config file; flags take precedence");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mahalanobis metric learning via SVM and logistic models on "
                 "doublet/triplet constraints, with a k-NN benchmark harness"};
    app.require_subcommand(1);

    kcml::cli::Options options;

    CLI::App* train = app.add_subcommand("train", "learn a metric and write it with a report");
    add_common_options(train, options, false, false);
    train->add_option("--trace", options.trace_path, "stream solver progress to this file");

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "cross-validated (or holdout) error of one method");
    add_common_options(evaluate, options, false, false);
    evaluate->add_option("--test-data", options.test_data,
                         "evaluate on this test set instead of cross-validating");

    CLI::App* benchmark =
        app.add_subcommand("benchmark", "evaluate methods across datasets and rank them");
    add_common_options(benchmark, options, true, true);

    CLI::App* sweep = app.add_subcommand("sweep", "grid over m1/m2/C with mean CV errors");
    add_common_options(sweep, options, false, false);
    sweep->add_option("--m1-grid", options.m1_grid, "m1 grid values");
    sweep->add_option("--m2-grid", options.m2_grid, "m2 grid values");
    sweep->add_option("--c-grid", options.c_grid, "C grid values");

    CLI::App* export_metric =
        app.add_subcommand("export-metric", "train and write just the metric text file");
    add_common_options(export_metric, options, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        const CLI::App* active = app.get_subcommands().front();
        if (!options.config_path.empty()) apply_config_file(active, options);
        if (options.data.empty())
            throw kcml::argument_error("no --data given (flag or config file)");
        if (app.got_subcommand(train)) {
            options.command = "train";
            return kcml::cli::cmd_train(options);
        }
        if (app.got_subcommand(evaluate)) {
            options.command = "evaluate";
            return kcml::cli::cmd_evaluate(options);
        }
        if (app.got_subcommand(benchmark)) {
            options.command = "benchmark";
            return kcml::cli::cmd_benchmark(options);
        }
        if (app.got_subcommand(sweep)) {
            options.command = "sweep";
            return kcml::cli::cmd_sweep(options);
        }
        options.command = "export-metric";
        return kcml::cli::cmd_export_metric(options);
    } catch (const kcml::argument_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
