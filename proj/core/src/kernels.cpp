#include "kcml/kernels.hpp"

#include <future>
#include <list>
#include <mutex>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "kcml/error.hpp"
#include "kcml/format.hpp"

namespace kcml {

double kernel_sample(std::span<const double> xi, std::span<const double> xj) {
    if (xi.size() != xj.size()) throw argument_error("kernel_sample: dimension mismatch");
    const double ip = dot(xi, xj);
    return ip * ip;
}

double kernel_doublet(const Doublet& zi, const Doublet& zj) {
    if (zi.diff.size() != zj.diff.size()) throw argument_error("kernel_doublet: dimension mismatch");
    const double ip = dot(zi.diff, zj.diff);
    return ip * ip;
}

double kernel_triplet(const Triplet& ti, const Triplet& tj) {
    if (ti.u.size() != tj.u.size()) throw argument_error("kernel_triplet: dimension mismatch");
    const double uu = dot(ti.u, tj.u);
    const double uv = dot(ti.u, tj.v);
    const double vu = dot(ti.v, tj.u);
    const double vv = dot(ti.v, tj.v);
    // grouped so swapping the arguments (which swaps uv and vu) is bit-exact
    return (uu * uu + vv * vv) - (uv * uv + vu * vu);
}

struct GramView::Impl {
    std::size_t n = 0;
    std::function<double(std::size_t, std::size_t)> entry;
    Vector diag;

    bool dense = false;
    std::vector<double> dense_values; // n * n when dense

    std::size_t capacity = 0;
    std::mutex mutex;
    std::list<std::size_t> lru; // most recent at back
    std::unordered_map<std::size_t,
                       std::pair<std::shared_ptr<const Vector>, std::list<std::size_t>::iterator>>
        cache;

    std::shared_ptr<const Vector> compute_row(std::size_t i) const {
        auto row = std::make_shared<Vector>(n);
        for (std::size_t j = 0; j < n; ++j) (*row)[j] = entry(i, j);
        return row;
    }
};

GramView make_gram_view(std::size_t n, std::function<double(std::size_t, std::size_t)> entry,
                        const GramOptions& options) {
    if (n == 0) throw argument_error("gram: empty constraint set");

    auto impl = std::make_shared<GramView::Impl>();
    impl->n = n;
    impl->entry = std::move(entry);
    impl->diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) impl->diag[i] = impl->entry(i, i);

    impl->dense = n <= options.dense_threshold;
    if (impl->dense) {
        impl->dense_values.assign(n * n, 0.0);
        auto fill_rows = [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t j = i; j < n; ++j) {
                    const double value = impl->entry(i, j);
                    impl->dense_values[i * n + j] = value;
                    impl->dense_values[j * n + i] = value;
                }
            }
        };
        const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
        if (n >= 512 && hw > 1) {
            std::vector<std::future<void>> tasks;
            const std::size_t block = (n + hw - 1) / hw;
            for (std::size_t w = 0; w < hw; ++w) {
                const std::size_t begin = w * block;
                const std::size_t end = std::min(n, begin + block);
                if (begin >= end) break;
                tasks.push_back(std::async(std::launch::async, fill_rows, begin, end));
            }
            for (auto& t : tasks) t.get();
        } else {
            fill_rows(0, n);
        }
    } else {
        impl->capacity = std::max<std::size_t>(1, options.cache_rows);
    }

    GramView view;
    view.impl_ = std::move(impl);
    return view;
}

GramView gram(const DoubletSet& set, const GramOptions& options) {
    auto diffs = std::make_shared<Matrix>(set.size(), set.dim);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Vector& diff = set.items[i].diff;
        std::copy(diff.begin(), diff.end(), diffs->row(i).begin());
    }
    return make_gram_view(
        set.size(),
        [diffs](std::size_t i, std::size_t j) {
            const double ip = dot(diffs->row(i), diffs->row(j));
            return ip * ip;
        },
        options);
}

GramView gram(const TripletSet& set, const GramOptions& options) {
    auto u = std::make_shared<Matrix>(set.size(), set.dim);
    auto v = std::make_shared<Matrix>(set.size(), set.dim);
    for (std::size_t i = 0; i < set.size(); ++i) {
        std::copy(set.items[i].u.begin(), set.items[i].u.end(), u->row(i).begin());
        std::copy(set.items[i].v.begin(), set.items[i].v.end(), v->row(i).begin());
    }
    return make_gram_view(
        set.size(),
        [u, v](std::size_t i, std::size_t j) {
            const double uu = dot(u->row(i), u->row(j));
            const double uv = dot(u->row(i), v->row(j));
            const double vu = dot(v->row(i), u->row(j));
            const double vv = dot(v->row(i), v->row(j));
            return (uu * uu + vv * vv) - (uv * uv + vu * vu);
        },
        options);
}

GramView gram_custom(std::size_t n, std::function<double(std::size_t, std::size_t)> entry,
                     const GramOptions& options) {
    return make_gram_view(n, std::move(entry), options);
}

std::size_t GramView::size() const noexcept { return impl_->n; }

bool GramView::is_dense() const noexcept { return impl_->dense; }

double GramView::diagonal(std::size_t i) const { return impl_->diag[i]; }

double GramView::entry(std::size_t i, std::size_t j) const {
    if (impl_->dense) return impl_->dense_values[i * impl_->n + j];
    return impl_->entry(i, j);
}

GramView::Row GramView::row(std::size_t i) const {
    Impl& impl = *impl_;
    if (impl.dense) return Row(impl.dense_values.data() + i * impl.n, impl.n, nullptr);

    {
        std::lock_guard lock(impl.mutex);
        auto it = impl.cache.find(i);
        if (it != impl.cache.end()) {
            impl.lru.splice(impl.lru.end(), impl.lru, it->second.second);
            return Row(it->second.first->data(), impl.n, it->second.first);
        }
    }
    // Computed outside the lock; a concurrent miss on the same row may
    // duplicate work but both results are identical.
    std::shared_ptr<const Vector> fresh = impl.compute_row(i);
    {
        std::lock_guard lock(impl.mutex);
        auto it = impl.cache.find(i);
        if (it == impl.cache.end()) {
            impl.lru.push_back(i);
            it = impl.cache.emplace(i, std::make_pair(fresh, std::prev(impl.lru.end()))).first;
            if (impl.cache.size() > impl.capacity) {
                const std::size_t victim = impl.lru.front();
                impl.lru.pop_front();
                impl.cache.erase(victim);
            }
        }
        return Row(it->second.first->data(), impl.n, it->second.first);
    }
}

void GramView::dump(std::ostream& out) const {
    out << size() << '\n';
    for (std::size_t i = 0; i < size(); ++i) out << format_row(row(i).values(), 17) << '\n';
}

} // namespace kcml
