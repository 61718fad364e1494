#ifndef KCML_CLI_COMMANDS_HPP
#define KCML_CLI_COMMANDS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace kcml::cli {

struct Options {
    std::vector<std::string> data;          // dataset paths; benchmark accepts several
    std::string test_data;                  // holdout test set (evaluate)
    std::string format = "auto";            // auto | csv | libsvm
    int label_column = -1;                  // csv label column, -1 = last
    std::vector<std::string> methods{"doublet-svm"}; // benchmark accepts several
    int m1 = 2;
    int m2 = 2;
    double C = 1.0;
    int k = 1;
    std::size_t pca = 0;
    int folds = 10;
    std::uint64_t seed = 0;
    double tolerance = 1e-3;
    std::size_t max_passes = 1000;
    std::string out = "kcml-out";
    bool no_standardize = false;
    bool raw_metric = false;
    int threads = 0;
    std::size_t subsample = 0;              // stratified subsample before anything else
    double klr_ridge = 0.0;
    std::size_t klr_max_iter = 500;
    std::string trace_path;                 // solver trace (train only)
    std::vector<int> m1_grid;               // sweep grids; empty = {m1} etc.
    std::vector<int> m2_grid;
    std::vector<double> c_grid;
    std::string config_path;                // optional key=value config file
    std::string command;                    // filled by main for report echoing
};

int cmd_train(const Options& options);
int cmd_evaluate(const Options& options);
int cmd_benchmark(const Options& options);
int cmd_sweep(const Options& options);
int cmd_export_metric(const Options& options);

} // namespace kcml::cli

#endif
