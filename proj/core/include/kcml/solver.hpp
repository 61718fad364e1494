#ifndef KCML_SOLVER_HPP
#define KCML_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>

#include "kcml/kernels.hpp"

namespace kcml {

struct SolverConfig {
    double C = 1.0;            ///< box bound, > 0
    double tolerance = 1e-3;   ///< max KKT violation at exit
    std::size_t max_passes = 1000; ///< hard cap of max_passes * N updates
    std::uint64_t seed = 0;    ///< reserved for randomized sweep orders; the
                               ///< shipped strategies are deterministic
    std::ostream* trace = nullptr; ///< one "iteration objective violation" line per sweep
    /// Diagnostics hook, called with the dual objective after every accepted
    /// update (pair update for doublets, coordinate update for triplets).
    std::function<void(double)> on_update;
};

struct DualSolution {
    Vector alphas;             ///< in [0, C]
    double bias_b = 0.0;       ///< doublet mode only
    double dual_objective = 0.0;
    double kkt_violation = 0.0;
    std::size_t iterations = 0; ///< accepted updates
    std::size_t support_count = 0;
};

/// Maximizes -1/2 sum a_i a_j h_i h_j K(i,j) + sum a_i over the box [0, C]^N
/// with sum a_l h_l = 0, by two-variable SMO steps on the maximal violating
/// pair. Needs both label values present. The bias is recovered from free
/// support vectors, or from the midpoint of the feasible interval when none
/// are free.
DualSolution solve_doublet_svm(const GramView& gram, std::span<const int> labels_h,
                               const SolverConfig& config);

/// Maximizes -1/2 sum a_i a_j K(i,j) + sum a_i over the box [0, C]^N by
/// cyclic exact coordinate ascent; no equality constraint. Coordinates with
/// K(l,l) = 0 are vacuous and stay pinned at 0.
DualSolution solve_triplet_svm(const GramView& gram, const SolverConfig& config);

/// Exact dual objective; pass an empty label span for the triplet form.
double dual_objective(std::span<const double> alphas, const GramView& gram,
                      std::span<const int> labels_h = {});

struct KktReport {
    double max_violation = 0.0;
    /// Dual-objective gradient per constraint, recomputed from scratch.
    Vector gradients;
    /// Per-constraint violation magnitude (box + stationarity).
    Vector violations;
};

/// Independent optimality check of a (possibly hand-built) solution; pass an
/// empty label span for the triplet problem. Zero-diagonal coordinates are
/// excluded from stationarity (they are vacuous constraints).
KktReport kkt_report(const DualSolution& solution, const GramView& gram,
                     std::span<const int> labels_h, double C);

} // namespace kcml

#endif
