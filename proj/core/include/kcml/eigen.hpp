#ifndef KCML_EIGEN_HPP
#define KCML_EIGEN_HPP

#include "kcml/matrix.hpp"

namespace kcml {

/// Eigen pairs of a symmetric matrix: eigenvalues sorted descending,
/// eigenvectors the matching orthonormal columns.
struct EigenDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

struct JacobiOptions {
    std::size_t max_sweeps = 100;
    /// Converged when every off-diagonal magnitude drops below
    /// tolerance * max(1, max |entry| of the input).
    double tolerance = 1e-14;
};

/// Cyclic Jacobi rotations with a deterministic (p, q) order.
///
/// The input must be symmetric within 1e-8 (relative to its magnitude); it is
/// symmetrized as (m + m^T)/2 before rotating. Throws argument_error on
/// shape/symmetry violations and numeric_error if the sweep budget runs out.
EigenDecomposition symmetric_eigendecomposition(const Matrix& m, const JacobiOptions& options = {});

} // namespace kcml

#endif
