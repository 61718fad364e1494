#include "kcml/metric.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "kcml/error.hpp"
#include "kcml/format.hpp"
#include "kcml/kernels.hpp"

namespace kcml {
namespace {

void symmetrize(Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = r + 1; c < m.cols(); ++c) {
            const double value = 0.5 * (m(r, c) + m(c, r));
            m(r, c) = value;
            m(c, r) = value;
        }
}

} // namespace

MetricMatrix reconstruct_doublet_metric(const DualSolution& solution, const DoubletSet& doublets) {
    if (solution.alphas.size() != doublets.size())
        throw argument_error("reconstruct_doublet_metric: size mismatch");
    MetricMatrix metric;
    metric.m = Matrix(doublets.dim, doublets.dim, 0.0);
    for (std::size_t l = 0; l < doublets.size(); ++l)
        add_scaled_outer(metric.m, doublets.items[l].label_h * solution.alphas[l],
                         doublets.items[l].diff);
    return metric;
}

MetricMatrix reconstruct_triplet_metric(const DualSolution& solution, const TripletSet& triplets) {
    if (solution.alphas.size() != triplets.size())
        throw argument_error("reconstruct_triplet_metric: size mismatch");
    MetricMatrix metric;
    metric.m = Matrix(triplets.dim, triplets.dim, 0.0);
    for (std::size_t l = 0; l < triplets.size(); ++l) {
        add_scaled_outer(metric.m, solution.alphas[l], triplets.items[l].u);
        add_scaled_outer(metric.m, -solution.alphas[l], triplets.items[l].v);
    }
    return metric;
}

MetricMatrix psd_project(const MetricMatrix& metric) {
    const EigenDecomposition eigen = symmetric_eigendecomposition(metric.m);
    const std::size_t d = metric.dim();

    MetricMatrix projected;
    projected.psd_projected = true;
    projected.dropped_eigenvalue_mass = 0.0;
    Vector clamped(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double value = eigen.eigenvalues[i];
        if (value >= 0.0) {
            clamped[i] = value;
        } else {
            clamped[i] = 0.0;
            if (value <= -1e-10) projected.dropped_eigenvalue_mass += -value;
        }
    }

    projected.m = Matrix(d, d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        if (clamped[i] == 0.0) continue;
        for (std::size_t r = 0; r < d; ++r) {
            const double w = clamped[i] * eigen.eigenvectors(r, i);
            for (std::size_t c = 0; c < d; ++c)
                projected.m(r, c) += w * eigen.eigenvectors(c, i);
        }
    }
    symmetrize(projected.m);
    return projected;
}

double mahalanobis(const MetricMatrix& metric, std::span<const double> x,
                   std::span<const double> y) {
    if (x.size() != y.size() || x.size() != metric.dim())
        throw argument_error("mahalanobis: dimension mismatch");
    const Vector diff = subtract(x, y);
    return quadratic_form(metric.m, diff);
}

double decision_doublet(const DualSolution& solution, const DoubletSet& doublets,
                        const Doublet& z) {
    if (solution.alphas.size() != doublets.size())
        throw argument_error("decision_doublet: size mismatch");
    double margin = solution.bias_b;
    for (std::size_t l = 0; l < doublets.size(); ++l) {
        if (solution.alphas[l] == 0.0) continue;
        margin += doublets.items[l].label_h * solution.alphas[l] *
                  kernel_doublet(doublets.items[l], z);
    }
    return margin;
}

double decision_triplet(const DualSolution& solution, const TripletSet& triplets,
                        const Triplet& t) {
    if (solution.alphas.size() != triplets.size())
        throw argument_error("decision_triplet: size mismatch");
    double value = 0.0;
    for (std::size_t l = 0; l < triplets.size(); ++l) {
        if (solution.alphas[l] == 0.0) continue;
        value += solution.alphas[l] * kernel_triplet(triplets.items[l], t);
    }
    return value;
}

void write_metric(std::ostream& out, const MetricMatrix& metric) {
    out << metric.dim() << ' ' << (metric.psd_projected ? 1 : 0) << '\n';
    for (std::size_t r = 0; r < metric.dim(); ++r)
        out << format_row(metric.m.row(r), 17) << '\n';
}

MetricMatrix read_metric(std::istream& in) {
    std::size_t d = 0;
    int psd_flag = 0;
    if (!(in >> d >> psd_flag) || d == 0) throw parse_error("metric file: bad header");
    MetricMatrix metric;
    metric.psd_projected = psd_flag != 0;
    metric.m = Matrix(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            if (!(in >> metric.m(r, c))) throw parse_error("metric file: truncated entries");
    return metric;
}

} // namespace kcml
