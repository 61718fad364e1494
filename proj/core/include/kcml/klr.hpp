#ifndef KCML_KLR_HPP
#define KCML_KLR_HPP

#include <iosfwd>

#include "kcml/kernels.hpp"
#include "kcml/metric.hpp"

namespace kcml {

/// Kernel logistic regression over doublets.
///
/// Label convention here is {0, 1} with 1 meaning "same class", the opposite
/// sign role from the +/-1 doublet labels used by the SVM path.
/// doublet_labels01 performs the flip.
struct KlrConfig {
    std::size_t max_iter = 500;
    double gradient_tolerance = 1e-5; ///< stop when ||grad||_inf drops below
    double ridge = 0.0;               ///< optional penalty (ridge/2)*||alpha||^2, off by default
    std::ostream* trace = nullptr;    ///< "iter log_likelihood grad_norm step" per accepted step
};

struct KlrSolution {
    Vector alphas; ///< unconstrained reals
    double bias_b = 0.0;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false; ///< false after max_iter (e.g. separable data diverging)
};

/// {0,1} labels for a doublet set under the KLR convention (1 = same class).
std::vector<int> doublet_labels01(const DoubletSet& doublets);

/// P(label = 1 | z) = sigmoid(-(sum_i alpha_i K(z_i, z) + b)), overflow-safe,
/// clamped into [1e-300, 1 - 1e-16].
double klr_probability(const KlrSolution& solution, std::span<const double> gram_row);

/// Maximizes the doublet log-likelihood by full-batch gradient ascent with
/// backtracking (Armijo) line search. Needs both label values present.
KlrSolution fit_doublet_klr(const GramView& gram, std::span<const int> labels01,
                            const KlrConfig& config = {});

/// M = sum_l alpha_l diff_l diff_l^T (no label factor; not necessarily PSD).
MetricMatrix reconstruct_klr_metric(const KlrSolution& solution, const DoubletSet& doublets);

} // namespace kcml

#endif
