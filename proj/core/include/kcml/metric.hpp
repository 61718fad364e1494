#ifndef KCML_METRIC_HPP
#define KCML_METRIC_HPP

#include <iosfwd>

#include "kcml/constraints.hpp"
#include "kcml/eigen.hpp"
#include "kcml/solver.hpp"

namespace kcml {

/// Symmetric d x d Mahalanobis matrix, optionally projected onto the PSD cone.
struct MetricMatrix {
    Matrix m;
    bool psd_projected = false;
    /// Sum of |clamped negative eigenvalues| recorded by psd_project.
    double dropped_eigenvalue_mass = 0.0;

    std::size_t dim() const noexcept { return m.rows(); }
};

/// M = sum_l h_l alpha_l diff_l diff_l^T.
MetricMatrix reconstruct_doublet_metric(const DualSolution& solution, const DoubletSet& doublets);

/// M = sum_l alpha_l (u_l u_l^T - v_l v_l^T).
MetricMatrix reconstruct_triplet_metric(const DualSolution& solution, const TripletSet& triplets);

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clamped to 0.
/// Eigenvalues in (-1e-10, 0] are treated as solver noise and do not count
/// toward dropped_eigenvalue_mass.
MetricMatrix psd_project(const MetricMatrix& metric);

/// (x - y)^T M (x - y).
double mahalanobis(const MetricMatrix& metric, std::span<const double> x,
                   std::span<const double> y);

/// Kernel-expansion margin sum_l h_l alpha_l K(z_l, z) + b; its sign predicts
/// "different classes" (+1) under the doublet label convention.
double decision_doublet(const DualSolution& solution, const DoubletSet& doublets,
                        const Doublet& z);

/// Kernel-expansion value sum_l alpha_l K(t_l, t), equal to the Mahalanobis
/// distance difference d_M(anchor, dissimilar) - d_M(anchor, similar) for the
/// reconstructed (pre-projection) M.
double decision_triplet(const DualSolution& solution, const TripletSet& triplets,
                        const Triplet& t);

/// Text form: "d psd_flag" then d rows of d entries, 17 significant digits.
void write_metric(std::ostream& out, const MetricMatrix& metric);
MetricMatrix read_metric(std::istream& in);

} // namespace kcml

#endif
