#ifndef KCML_CONSTRAINTS_HPP
#define KCML_CONSTRAINTS_HPP

#include <cstddef>
#include <iosfwd>

#include "kcml/dataset.hpp"

namespace kcml {

/// Ordered sample pair; label_h is -1 when both samples share a class and
/// +1 otherwise.
struct Doublet {
    std::size_t first = 0;
    std::size_t second = 0;
    int label_h = 0;
    Vector diff; ///< features(first) - features(second)
};

/// (anchor, similar, dissimilar) with y_anchor == y_similar != y_dissimilar.
struct Triplet {
    std::size_t anchor = 0;
    std::size_t similar = 0;
    std::size_t dissimilar = 0;
    Vector u; ///< features(anchor) - features(dissimilar)
    Vector v; ///< features(anchor) - features(similar)
};

struct DoubletSet {
    std::vector<Doublet> items;
    int m1 = 0;
    int m2 = 0;
    std::size_t source_size = 0;
    std::size_t dim = 0;
    std::size_t dropped_zero_diff = 0; ///< duplicate-point doublets removed

    std::size_t size() const noexcept { return items.size(); }
};

struct TripletSet {
    std::vector<Triplet> items;
    int m1 = 0;
    int m2 = 0;
    std::size_t source_size = 0;
    std::size_t dim = 0;
    std::size_t dropped_degenerate = 0; ///< triplets with a zero u or v removed

    std::size_t size() const noexcept { return items.size(); }
};

/// Per sample: doublets with its m1 nearest same-class neighbors (h = -1)
/// and m2 nearest different-class neighbors (h = +1), Euclidean nearest,
/// ties broken by smaller index. Classes short of neighbors are truncated;
/// zero-difference doublets are dropped and counted.
DoubletSet build_doublets(const Dataset& data, int m1, int m2);

/// Per sample: the m1 x m2 cross product of nearest same-class and nearest
/// different-class neighbors, same neighbor rules as build_doublets.
TripletSet build_triplets(const Dataset& data, int m1, int m2);

/// One constraint per line: "first second h" / "anchor similar dissimilar".
void write_doublets(std::ostream& out, const DoubletSet& set);
void write_triplets(std::ostream& out, const TripletSet& set);

} // namespace kcml

#endif
