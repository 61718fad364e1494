#ifndef KCML_KERNELS_HPP
#define KCML_KERNELS_HPP

#include <functional>
#include <iosfwd>
#include <memory>

#include "kcml/constraints.hpp"

namespace kcml {

/// (x_i . x_j)^2, the trace of the product of the two outer-product matrices.
double kernel_sample(std::span<const double> xi, std::span<const double> xj);

/// (diff_i . diff_j)^2; always >= 0.
double kernel_doublet(const Doublet& zi, const Doublet& zj);

/// Inner product of T_i = u_i u_i^T - v_i v_i^T and T_j, evaluated without
/// forming either matrix: (u_i.u_j)^2 - (u_i.v_j)^2 - (v_i.u_j)^2 + (v_i.v_j)^2.
double kernel_triplet(const Triplet& ti, const Triplet& tj);

struct GramOptions {
    std::size_t dense_threshold = 8192; ///< precompute N x N while N <= threshold
    std::size_t cache_rows = 1024;      ///< LRU row capacity above the threshold
};

/// Symmetric kernel matrix over a constraint set. Dense and row-cached modes
/// produce bit-identical rows; the diagonal is always precomputed. Rows may
/// be fetched from multiple threads: insertions are serialized, reads share
/// immutable row storage (a racing miss may recompute a row, never tear one).
class GramView {
public:
    /// A borrowed row; keeps cached storage alive while held.
    class Row {
    public:
        double operator[](std::size_t j) const noexcept { return data_[j]; }
        std::span<const double> values() const noexcept { return {data_, size_}; }
        std::size_t size() const noexcept { return size_; }

    private:
        friend class GramView;
        Row(const double* data, std::size_t size, std::shared_ptr<const Vector> hold)
            : data_(data), size_(size), hold_(std::move(hold)) {}
        const double* data_;
        std::size_t size_;
        std::shared_ptr<const Vector> hold_;
    };

    std::size_t size() const noexcept;
    bool is_dense() const noexcept;
    Row row(std::size_t i) const;
    double diagonal(std::size_t i) const;
    /// Single entry, bypassing the row cache.
    double entry(std::size_t i, std::size_t j) const;

    /// Text dump: "N" then N rows of N entries at 17 significant digits.
    void dump(std::ostream& out) const;

private:
    friend GramView make_gram_view(std::size_t, std::function<double(std::size_t, std::size_t)>,
                                   const GramOptions&);
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

GramView gram(const DoubletSet& set, const GramOptions& options = {});
GramView gram(const TripletSet& set, const GramOptions& options = {});

/// Arbitrary symmetric entry function; entry(i, j) must equal entry(j, i).
GramView gram_custom(std::size_t n, std::function<double(std::size_t, std::size_t)> entry,
                     const GramOptions& options = {});

} // namespace kcml

#endif
