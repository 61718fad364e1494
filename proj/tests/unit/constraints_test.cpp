#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "kcml/constraints.hpp"
#include "kcml/error.hpp"
#include "toy_data.hpp"

using namespace kcml;

namespace {

Dataset two_per_class() {
    Dataset data;
    data.samples = {
        {{0.0, 0.0}, 0}, {{0.1, 0.0}, 0}, {{5.0, 5.0}, 1}, {{5.1, 5.0}, 1}};
    return data;
}

} // namespace

TEST_CASE("two same-class samples give two h=-1 doublets") {
    Dataset data;
    data.samples = {{{0.0}, 0}, {{1.0}, 0}};
    const DoubletSet set = build_doublets(data, 1, 0);
    CHECK(set.size() == 2);
    for (const auto& z : set.items) CHECK(z.label_h == -1);
    // directed duplicates are kept: (0,1) and (1,0)
    CHECK(set.items[0].first == 0);
    CHECK(set.items[1].first == 1);
}

TEST_CASE("four samples two per class build eight doublets") {
    const Dataset data = two_per_class();
    const DoubletSet set = build_doublets(data, 1, 1);
    // oracle: exhaustive enumeration of the construction rule
    CHECK(set.size() == 8);
    int same = 0, different = 0;
    for (const auto& z : set.items) {
        const bool same_class = data.samples[z.first].label == data.samples[z.second].label;
        CHECK(z.label_h == (same_class ? -1 : 1));
        (same_class ? same : different) += 1;
    }
    CHECK(same == 4);
    CHECK(different == 4);
}

TEST_CASE("four samples two per class build four triplets") {
    const Dataset data = two_per_class();
    const TripletSet set = build_triplets(data, 1, 1);
    CHECK(set.size() == 4);
    for (const auto& t : set.items) {
        CHECK(data.samples[t.anchor].label == data.samples[t.similar].label);
        CHECK(data.samples[t.anchor].label != data.samples[t.dissimilar].label);
    }
}

TEST_CASE("triplet count per anchor is bounded by m1 * m2") {
    const Dataset data = testing::make_blobs(3, 8, 3, 1.0, 4);
    const TripletSet set = build_triplets(data, 2, 3);
    CHECK(set.size() <= data.size() * 6);
    std::map<std::size_t, int> per_anchor;
    for (const auto& t : set.items) ++per_anchor[t.anchor];
    for (const auto& [anchor, count] : per_anchor) CHECK(count <= 6);
}

TEST_CASE("cached difference vectors equal recomputation exactly") {
    const Dataset data = testing::make_blobs(3, 10, 4, 1.5, 6);
    const DoubletSet doublets = build_doublets(data, 2, 2);
    for (const auto& z : doublets.items)
        CHECK(z.diff == subtract(data.samples[z.first].features, data.samples[z.second].features));
    const TripletSet triplets = build_triplets(data, 2, 2);
    for (const auto& t : triplets.items) {
        CHECK(t.u == subtract(data.samples[t.anchor].features,
                              data.samples[t.dissimilar].features));
        CHECK(t.v == subtract(data.samples[t.anchor].features,
                              data.samples[t.similar].features));
    }
}

TEST_CASE("set sizes respect the construction bounds") {
    const Dataset data = testing::make_blobs(4, 12, 3, 2.0, 13);
    for (int m1 = 1; m1 <= 3; ++m1) {
        for (int m2 = 1; m2 <= 3; ++m2) {
            const DoubletSet d = build_doublets(data, m1, m2);
            CHECK(d.size() + d.dropped_zero_diff <= data.size() * (m1 + m2));
            const TripletSet t = build_triplets(data, m1, m2);
            CHECK(t.size() + t.dropped_degenerate <= data.size() * m1 * m2);
        }
    }
    // no duplicates in this toy data, so the bounds are tight
    const DoubletSet d = build_doublets(data, 2, 1);
    CHECK(d.size() == data.size() * 3);
}

TEST_CASE("neighbors are the Euclidean-nearest with index tie-breaks") {
    Dataset data;
    data.samples = {{{0.0}, 0}, {{1.0}, 0}, {{-1.0}, 0}, {{3.0}, 1}};
    const DoubletSet set = build_doublets(data, 1, 1);
    // anchor 0: samples 1 and 2 tie at distance 1; smaller index wins
    CHECK(set.items[0].first == 0);
    CHECK(set.items[0].second == 1);
    CHECK(set.items[1].second == 3); // the only dissimilar
}

TEST_CASE("single-class data with m2 >= 1 is a constraint error") {
    Dataset data;
    data.samples = {{{0.0}, 0}, {{1.0}, 0}};
    CHECK_THROWS_AS(build_doublets(data, 1, 1), constraint_error);
    CHECK_THROWS_AS(build_triplets(data, 1, 1), constraint_error);
    CHECK_NOTHROW(build_doublets(data, 1, 0));
}

TEST_CASE("classes short of neighbors truncate instead of erroring") {
    Dataset data;
    data.samples = {{{0.0}, 0}, {{1.0}, 1}, {{2.0}, 1}, {{3.0}, 1}};
    const DoubletSet set = build_doublets(data, 2, 1);
    // anchor 0 has no same-class neighbor at all
    std::size_t from_anchor0 = 0;
    for (const auto& z : set.items)
        if (z.first == 0) ++from_anchor0;
    CHECK(from_anchor0 == 1);
    const TripletSet triplets = build_triplets(data, 1, 1);
    for (const auto& t : triplets.items) CHECK(t.anchor != 0);
}

TEST_CASE("duplicate points are dropped with a count") {
    Dataset data;
    data.samples = {{{1.0, 1.0}, 0}, {{1.0, 1.0}, 0}, {{4.0, 4.0}, 1}, {{4.5, 4.0}, 1}};
    const DoubletSet set = build_doublets(data, 1, 1);
    CHECK(set.dropped_zero_diff == 2); // both directions of the duplicate pair
    for (const auto& z : set.items) CHECK(squared_norm(z.diff) > 0.0);
}

TEST_CASE("invalid m arguments are rejected") {
    const Dataset data = two_per_class();
    CHECK_THROWS_AS(build_doublets(data, 0, 0), argument_error);
    CHECK_THROWS_AS(build_doublets(data, -1, 2), argument_error);
    CHECK_THROWS_AS(build_triplets(data, 0, 1), argument_error);
}

TEST_CASE("constraint sets export one line per constraint") {
    const Dataset data = two_per_class();
    const DoubletSet doublets = build_doublets(data, 1, 1);
    std::stringstream out;
    write_doublets(out, doublets);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(out, line)) ++lines;
    CHECK(lines == doublets.size());

    const TripletSet triplets = build_triplets(data, 1, 1);
    std::stringstream tout;
    write_triplets(tout, triplets);
    CHECK(tout.str().find(' ') != std::string::npos);
}
