#include "kcml/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "kcml/eigen.hpp"
#include "kcml/error.hpp"
#include "kcml/format.hpp"

namespace kcml {
namespace {

bool parse_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size();
}

bool parse_int(const std::string& token, long& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtol(token.c_str(), &end, 10);
    return end == token.c_str() + token.size();
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delimiter)) fields.push_back(trim(field));
    if (!line.empty() && line.back() == delimiter) fields.emplace_back();
    return fields;
}

// Fisher-Yates with mt19937_64 so shuffles are reproducible across standard
// library implementations (std::shuffle is not pinned by the standard).
void deterministic_shuffle(std::vector<std::size_t>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.label);
    return out;
}

std::vector<int> Dataset::distinct_labels() const {
    std::set<int> seen;
    for (const auto& s : samples) seen.insert(s.label);
    return {seen.begin(), seen.end()};
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        rows.push_back(split(line, options.delimiter));
        line_numbers.push_back(line_no);
    }
    if (rows.empty()) throw parse_error(path + ": empty dataset");

    const std::size_t field_count = rows.front().size();
    if (field_count < 2) throw parse_error(path + ": need at least one feature column and a label");
    std::size_t label_col;
    if (options.label_column < 0)
        label_col = field_count - 1;
    else if (static_cast<std::size_t>(options.label_column) < field_count)
        label_col = static_cast<std::size_t>(options.label_column);
    else
        throw argument_error(path + ": label column out of range");

    // Header row: some feature field fails to parse as a number.
    std::size_t first_row = 0;
    {
        double ignored;
        for (std::size_t c = 0; c < field_count; ++c) {
            if (c == label_col) continue;
            if (!parse_double(rows[0][c], ignored)) {
                first_row = 1;
                break;
            }
        }
    }
    if (first_row >= rows.size()) throw parse_error(path + ": empty dataset");

    for (std::size_t r = first_row; r < rows.size(); ++r)
        if (rows[r].size() != field_count)
            throw parse_error(path + ": line " + std::to_string(line_numbers[r]) + " has " +
                              std::to_string(rows[r].size()) + " fields, expected " +
                              std::to_string(field_count));

    bool labels_are_integers = true;
    for (std::size_t r = first_row; r < rows.size(); ++r) {
        long ignored;
        if (!parse_int(rows[r][label_col], ignored)) {
            labels_are_integers = false;
            break;
        }
    }

    Dataset data;
    data.name = std::filesystem::path(path).stem().string();
    std::map<std::string, int> label_ids;
    for (std::size_t r = first_row; r < rows.size(); ++r) {
        Sample s;
        s.features.reserve(field_count - 1);
        for (std::size_t c = 0; c < field_count; ++c) {
            if (c == label_col) continue;
            double value;
            if (!parse_double(rows[r][c], value))
                throw parse_error(path + ": line " + std::to_string(line_numbers[r]) +
                                  ": non-numeric feature '" + rows[r][c] + "'");
            s.features.push_back(value);
        }
        if (labels_are_integers) {
            long value;
            parse_int(rows[r][label_col], value);
            s.label = static_cast<int>(value);
        } else {
            const std::string& token = rows[r][label_col];
            auto it = label_ids.find(token);
            if (it == label_ids.end()) {
                it = label_ids.emplace(token, static_cast<int>(data.label_names.size())).first;
                data.label_names.push_back(token);
            }
            s.label = it->second;
        }
        data.samples.push_back(std::move(s));
    }
    return data;
}

Dataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);

    struct SparseRow {
        int label;
        std::vector<std::pair<std::size_t, double>> entries;
    };
    std::vector<SparseRow> rows;
    std::size_t max_index = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;
        std::istringstream tokens(text);
        std::string token;
        tokens >> token;
        long label;
        if (!parse_int(token, label))
            throw parse_error(path + ": line " + std::to_string(line_no) + ": bad label '" +
                              token + "'");
        SparseRow row{static_cast<int>(label), {}};
        std::size_t previous = 0;
        while (tokens >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos)
                throw parse_error(path + ": line " + std::to_string(line_no) +
                                  ": expected idx:val, got '" + token + "'");
            long index;
            double value;
            if (!parse_int(token.substr(0, colon), index) || index < 1)
                throw parse_error(path + ": line " + std::to_string(line_no) + ": bad index in '" +
                                  token + "'");
            if (!parse_double(token.substr(colon + 1), value))
                throw parse_error(path + ": line " + std::to_string(line_no) + ": bad value in '" +
                                  token + "'");
            if (static_cast<std::size_t>(index) <= previous)
                throw parse_error(path + ": line " + std::to_string(line_no) +
                                  ": indices must be strictly increasing");
            previous = static_cast<std::size_t>(index);
            row.entries.emplace_back(previous, value);
        }
        max_index = std::max(max_index, previous);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error(path + ": empty dataset");

    Dataset data;
    data.name = std::filesystem::path(path).stem().string();
    for (auto& row : rows) {
        Sample s;
        s.features.assign(max_index, 0.0);
        for (const auto& [index, value] : row.entries) s.features[index - 1] = value;
        s.label = row.label;
        data.samples.push_back(std::move(s));
    }
    return data;
}

StandardizeParams standardize_fit(const Dataset& train) {
    if (train.samples.empty()) throw argument_error("standardize_fit: empty training set");
    const std::size_t d = train.dim();
    const double n = static_cast<double>(train.size());

    StandardizeParams params;
    params.mean.assign(d, 0.0);
    params.stddev.assign(d, 0.0);
    for (const auto& s : train.samples)
        for (std::size_t c = 0; c < d; ++c) params.mean[c] += s.features[c];
    for (std::size_t c = 0; c < d; ++c) params.mean[c] /= n;
    for (const auto& s : train.samples)
        for (std::size_t c = 0; c < d; ++c) {
            const double dev = s.features[c] - params.mean[c];
            params.stddev[c] += dev * dev;
        }
    for (std::size_t c = 0; c < d; ++c) params.stddev[c] = std::sqrt(params.stddev[c] / n);
    return params;
}

Dataset standardize_apply(const StandardizeParams& params, const Dataset& data) {
    if (data.dim() != params.mean.size())
        throw argument_error("standardize_apply: dimension mismatch");
    Dataset out = data;
    for (auto& s : out.samples)
        for (std::size_t c = 0; c < params.mean.size(); ++c)
            s.features[c] = params.stddev[c] == 0.0
                                ? 0.0
                                : (s.features[c] - params.mean[c]) / params.stddev[c];
    return out;
}

std::tuple<Dataset, Dataset, StandardizeParams> standardize_fit_apply(const Dataset& train,
                                                                      const Dataset& test) {
    StandardizeParams params = standardize_fit(train);
    return {standardize_apply(params, train), standardize_apply(params, test), params};
}

PcaModel pca_fit(const Dataset& data, std::size_t target_dim) {
    const std::size_t n = data.size();
    const std::size_t d = data.dim();
    if (n == 0) throw argument_error("pca_fit: empty dataset");
    if (target_dim < 1 || target_dim > std::min(d, n))
        throw argument_error("pca_fit: target dimension must be in [1, min(d, n)]");

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (const auto& s : data.samples)
        for (std::size_t c = 0; c < d; ++c) model.mean[c] += s.features[c];
    for (std::size_t c = 0; c < d; ++c) model.mean[c] /= static_cast<double>(n);

    Matrix covariance(d, d, 0.0);
    Vector centered(d);
    for (const auto& s : data.samples) {
        for (std::size_t c = 0; c < d; ++c) centered[c] = s.features[c] - model.mean[c];
        add_scaled_outer(covariance, 1.0, centered);
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) covariance(r, c) /= denom;

    const EigenDecomposition eigen = symmetric_eigendecomposition(covariance);
    model.basis = Matrix(d, target_dim);
    model.explained_variance.resize(target_dim);
    for (std::size_t c = 0; c < target_dim; ++c) {
        model.explained_variance[c] = std::max(0.0, eigen.eigenvalues[c]);
        for (std::size_t r = 0; r < d; ++r) model.basis(r, c) = eigen.eigenvectors(r, c);
    }
    return model;
}

Dataset pca_transform(const PcaModel& model, const Dataset& data) {
    if (data.dim() != model.input_dim()) throw argument_error("pca_transform: dimension mismatch");
    const std::size_t d = model.input_dim();
    const std::size_t p = model.output_dim();

    Dataset out;
    out.name = data.name;
    out.label_names = data.label_names;
    out.samples.reserve(data.size());
    for (const auto& s : data.samples) {
        Sample projected;
        projected.label = s.label;
        projected.features.assign(p, 0.0);
        for (std::size_t c = 0; c < p; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r)
                acc += (s.features[r] - model.mean[r]) * model.basis(r, c);
            projected.features[c] = acc;
        }
        out.samples.push_back(std::move(projected));
    }
    return out;
}

void write_pca(std::ostream& out, const PcaModel& model) {
    out << model.input_dim() << ' ' << model.output_dim() << '\n';
    out << format_row(model.mean, 17) << '\n';
    for (std::size_t r = 0; r < model.input_dim(); ++r)
        out << format_row(model.basis.row(r), 17) << '\n';
}

PcaModel read_pca(std::istream& in) {
    std::size_t d = 0, p = 0;
    if (!(in >> d >> p) || d == 0 || p == 0 || p > d)
        throw parse_error("pca model: bad header");
    PcaModel model;
    model.mean.resize(d);
    for (auto& v : model.mean)
        if (!(in >> v)) throw parse_error("pca model: truncated mean");
    model.basis = Matrix(d, p);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < p; ++c)
            if (!(in >> model.basis(r, c))) throw parse_error("pca model: truncated basis");
    model.explained_variance.assign(p, 0.0);
    return model;
}

CvSplit kfold_split(const Dataset& data, int k, std::uint64_t seed) {
    const std::size_t n = data.size();
    if (k < 2) throw argument_error("kfold_split: k must be at least 2");
    if (static_cast<std::size_t>(k) > n) throw argument_error("kfold_split: k exceeds sample count");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[data.samples[i].label].push_back(i);
    bool stratify = true;
    for (const auto& [label, members] : by_class)
        if (members.size() < static_cast<std::size_t>(k)) stratify = false;

    std::mt19937_64 rng(seed);
    CvSplit split;
    split.fold_count = k;
    split.assignments.assign(n, 0);
    if (stratify) {
        // Deal classes consecutively with a carried offset so global fold
        // sizes still differ by at most one.
        std::size_t offset = 0;
        for (auto& [label, members] : by_class) {
            deterministic_shuffle(members, rng);
            for (std::size_t i = 0; i < members.size(); ++i)
                split.assignments[members[i]] = static_cast<int>((offset + i) % k);
            offset = (offset + members.size()) % k;
        }
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        deterministic_shuffle(order, rng);
        for (std::size_t i = 0; i < n; ++i)
            split.assignments[order[i]] = static_cast<int>(i % k);
    }
    return split;
}

Dataset subsample_stratified(const Dataset& data, std::size_t target_size, std::uint64_t seed) {
    const std::size_t n = data.size();
    if (target_size == 0) throw argument_error("subsample_stratified: target size must be positive");
    if (target_size >= n) return data;

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[data.samples[i].label].push_back(i);

    // Largest-remainder quotas, ties broken by class order.
    std::vector<std::pair<int, double>> shares;
    std::size_t assigned = 0;
    std::map<int, std::size_t> quota;
    for (const auto& [label, members] : by_class) {
        const double exact =
            static_cast<double>(members.size()) * static_cast<double>(target_size) / n;
        quota[label] = static_cast<std::size_t>(exact);
        assigned += quota[label];
        shares.emplace_back(label, exact - std::floor(exact));
    }
    std::stable_sort(shares.begin(), shares.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; assigned < target_size && i < shares.size(); ++i, ++assigned)
        ++quota[shares[i].first];

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    for (auto& [label, members] : by_class) {
        deterministic_shuffle(members, rng);
        const std::size_t take = std::min(quota[label], members.size());
        chosen.insert(chosen.end(), members.begin(), members.begin() + take);
    }
    std::sort(chosen.begin(), chosen.end());

    Dataset out;
    out.name = data.name;
    out.label_names = data.label_names;
    out.samples.reserve(chosen.size());
    for (std::size_t idx : chosen) out.samples.push_back(data.samples[idx]);
    return out;
}

} // namespace kcml
