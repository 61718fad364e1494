#include "kcml/constraints.hpp"

#include <algorithm>
#include <future>
#include <ostream>
#include <thread>

#include "kcml/error.hpp"

namespace kcml {
namespace {

struct Neighbors {
    std::vector<std::size_t> same;      // nearest same-class, closest first
    std::vector<std::size_t> different; // nearest different-class, closest first
};

// Nearest neighbors of anchor by squared Euclidean distance, ties broken by
// smaller sample index.
Neighbors nearest_neighbors(const Dataset& data, std::size_t anchor, std::size_t want_same,
                            std::size_t want_different) {
    const auto& a = data.samples[anchor];
    std::vector<std::pair<double, std::size_t>> same, different;
    for (std::size_t j = 0; j < data.size(); ++j) {
        if (j == anchor) continue;
        const auto& b = data.samples[j];
        double dist = 0.0;
        for (std::size_t c = 0; c < a.features.size(); ++c) {
            const double dv = a.features[c] - b.features[c];
            dist += dv * dv;
        }
        if (b.label == a.label)
            same.emplace_back(dist, j);
        else
            different.emplace_back(dist, j);
    }
    auto take = [](std::vector<std::pair<double, std::size_t>>& candidates, std::size_t count) {
        count = std::min(count, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + count, candidates.end());
        std::vector<std::size_t> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = candidates[i].second;
        return out;
    };
    return {take(same, want_same), take(different, want_different)};
}

void validate(const Dataset& data, int m1, int m2, bool triplet_mode) {
    if (data.size() < 2) throw constraint_error("constraint construction needs at least 2 samples");
    if (triplet_mode) {
        if (m1 < 1 || m2 < 1) throw argument_error("build_triplets: m1 and m2 must be >= 1");
    } else {
        if (m1 < 0 || m2 < 0 || m1 + m2 < 1)
            throw argument_error("build_doublets: need m1, m2 >= 0 with m1 + m2 >= 1");
    }
    if (m2 >= 1 && data.distinct_labels().size() < 2)
        throw constraint_error("dataset has a single class; no dissimilar neighbors exist");
}

// Runs fn(anchor) over all anchors, in parallel blocks, preserving order.
template <typename Fn>
void for_each_anchor(std::size_t n, Fn&& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, n > 256 ? hw : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> tasks;
    const std::size_t block = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * block;
        const std::size_t end = std::min(n, begin + block);
        if (begin >= end) break;
        tasks.push_back(std::async(std::launch::async, [begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }));
    }
    for (auto& t : tasks) t.get();
}

} // namespace

DoubletSet build_doublets(const Dataset& data, int m1, int m2) {
    validate(data, m1, m2, false);

    DoubletSet set;
    set.m1 = m1;
    set.m2 = m2;
    set.source_size = data.size();
    set.dim = data.dim();

    std::vector<std::vector<Doublet>> per_anchor(data.size());
    std::vector<std::size_t> dropped(data.size(), 0);
    for_each_anchor(data.size(), [&](std::size_t i) {
        const Neighbors nb = nearest_neighbors(data, i, static_cast<std::size_t>(m1),
                                               static_cast<std::size_t>(m2));
        auto emit = [&](std::size_t j, int h) {
            Doublet z;
            z.first = i;
            z.second = j;
            z.label_h = h;
            z.diff = subtract(data.samples[i].features, data.samples[j].features);
            if (squared_norm(z.diff) == 0.0) {
                ++dropped[i];
                return;
            }
            per_anchor[i].push_back(std::move(z));
        };
        for (std::size_t j : nb.same) emit(j, -1);
        for (std::size_t j : nb.different) emit(j, +1);
    });
    for (std::size_t i = 0; i < data.size(); ++i) {
        set.dropped_zero_diff += dropped[i];
        for (auto& z : per_anchor[i]) set.items.push_back(std::move(z));
    }
    return set;
}

TripletSet build_triplets(const Dataset& data, int m1, int m2) {
    validate(data, m1, m2, true);

    TripletSet set;
    set.m1 = m1;
    set.m2 = m2;
    set.source_size = data.size();
    set.dim = data.dim();

    std::vector<std::vector<Triplet>> per_anchor(data.size());
    std::vector<std::size_t> dropped(data.size(), 0);
    for_each_anchor(data.size(), [&](std::size_t i) {
        const Neighbors nb = nearest_neighbors(data, i, static_cast<std::size_t>(m1),
                                               static_cast<std::size_t>(m2));
        for (std::size_t j : nb.same) {
            for (std::size_t k : nb.different) {
                Triplet t;
                t.anchor = i;
                t.similar = j;
                t.dissimilar = k;
                t.u = subtract(data.samples[i].features, data.samples[k].features);
                t.v = subtract(data.samples[i].features, data.samples[j].features);
                if (squared_norm(t.u) == 0.0 || squared_norm(t.v) == 0.0) {
                    ++dropped[i];
                    continue;
                }
                per_anchor[i].push_back(std::move(t));
            }
        }
    });
    for (std::size_t i = 0; i < data.size(); ++i) {
        set.dropped_degenerate += dropped[i];
        for (auto& t : per_anchor[i]) set.items.push_back(std::move(t));
    }
    return set;
}

void write_doublets(std::ostream& out, const DoubletSet& set) {
    for (const auto& z : set.items)
        out << z.first << ' ' << z.second << ' ' << z.label_h << '\n';
}

void write_triplets(std::ostream& out, const TripletSet& set) {
    for (const auto& t : set.items)
        out << t.anchor << ' ' << t.similar << ' ' << t.dissimilar << '\n';
}

} // namespace kcml
