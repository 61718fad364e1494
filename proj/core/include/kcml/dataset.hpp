#ifndef KCML_DATASET_HPP
#define KCML_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <tuple>
#include <vector>

#include "kcml/matrix.hpp"

namespace kcml {

struct Sample {
    Vector features;
    int label = 0;
};

/// Labeled feature vectors with one dimension across all samples.
struct Dataset {
    std::string name;
    std::vector<Sample> samples;
    /// Class id -> original token when labels were remapped from strings
    /// (first-occurrence order); empty when labels parsed as integers.
    std::vector<std::string> label_names;

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t dim() const noexcept {
        return samples.empty() ? 0 : samples.front().features.size();
    }
    std::vector<int> labels() const;
    /// Distinct labels, ascending.
    std::vector<int> distinct_labels() const;
};

struct CsvOptions {
    int label_column = -1; ///< column index of the label; -1 selects the last column
    char delimiter = ',';
};

/// Comma-separated values, optional header (detected by a non-numeric
/// feature field in the first row). String labels are mapped to 0-based ids
/// in first-occurrence order.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

/// "label idx:val idx:val ..." lines, 1-based strictly increasing indices,
/// densified with zeros up to the largest index seen.
Dataset load_libsvm(const std::string& path);

struct StandardizeParams {
    Vector mean;
    Vector stddev; ///< population std; 0 marks a constant feature (its output is 0)
};

StandardizeParams standardize_fit(const Dataset& train);
Dataset standardize_apply(const StandardizeParams& params, const Dataset& data);
std::tuple<Dataset, Dataset, StandardizeParams> standardize_fit_apply(const Dataset& train,
                                                                      const Dataset& test);

struct PcaModel {
    Vector mean;
    Matrix basis;              ///< d x p with orthonormal columns
    Vector explained_variance; ///< length p, non-increasing, entries >= 0

    std::size_t input_dim() const noexcept { return basis.rows(); }
    std::size_t output_dim() const noexcept { return basis.cols(); }
};

/// Top-p eigenvectors of the sample covariance (same symmetric eigensolver
/// as the metric module). Requires 1 <= target_dim <= min(d, n).
PcaModel pca_fit(const Dataset& data, std::size_t target_dim);
Dataset pca_transform(const PcaModel& model, const Dataset& data);

/// Text form: "d p" / mean row / d rows of p basis entries, 17 significant digits.
void write_pca(std::ostream& out, const PcaModel& model);
PcaModel read_pca(std::istream& in);

struct CvSplit {
    int fold_count = 0;
    std::vector<int> assignments; ///< per-sample fold index in [0, fold_count)
};

/// Deterministic for a given seed. Stratified per class when every class has
/// at least k members, plain shuffled folds otherwise; fold sizes differ by
/// at most one either way.
CvSplit kfold_split(const Dataset& data, int k, std::uint64_t seed);

/// Class-proportional random subsample (largest-remainder quotas); returns a
/// copy when target_size >= n. Sample order follows the source dataset.
Dataset subsample_stratified(const Dataset& data, std::size_t target_size, std::uint64_t seed);

} // namespace kcml

#endif
