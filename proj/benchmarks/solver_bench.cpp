#include <random>

#include <benchmark/benchmark.h>

#include "kcml/eval.hpp"
#include "kcml/solver.hpp"

namespace {

kcml::Dataset blob_data(std::size_t per_class, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    kcml::Dataset data;
    data.name = "bench";
    for (int label = 0; label < 2; ++label) {
        for (std::size_t i = 0; i < per_class; ++i) {
            kcml::Sample s;
            s.label = label;
            s.features.resize(dim);
            for (auto& v : s.features) v = noise(rng) + label * 3.0;
            data.samples.push_back(std::move(s));
        }
    }
    return data;
}

void BM_DoubletSmo(benchmark::State& state) {
    const kcml::Dataset data = blob_data(state.range(0), 10, 7);
    const kcml::DoubletSet set = kcml::build_doublets(data, 2, 2);
    const kcml::GramView view = kcml::gram(set);
    std::vector<int> labels;
    for (const auto& z : set.items) labels.push_back(z.label_h);
    kcml::SolverConfig config;
    for (auto _ : state) {
        const kcml::DualSolution solution = kcml::solve_doublet_svm(view, labels, config);
        benchmark::DoNotOptimize(solution.dual_objective);
    }
    state.counters["constraints"] = static_cast<double>(set.size());
}
BENCHMARK(BM_DoubletSmo)->Arg(64)->Arg(256);

void BM_TripletCoordinateAscent(benchmark::State& state) {
    const kcml::Dataset data = blob_data(state.range(0), 10, 7);
    const kcml::TripletSet set = kcml::build_triplets(data, 2, 2);
    const kcml::GramView view = kcml::gram(set);
    kcml::SolverConfig config;
    for (auto _ : state) {
        const kcml::DualSolution solution = kcml::solve_triplet_svm(view, config);
        benchmark::DoNotOptimize(solution.dual_objective);
    }
    state.counters["constraints"] = static_cast<double>(set.size());
}
BENCHMARK(BM_TripletCoordinateAscent)->Arg(64)->Arg(256);

void BM_KnnQuery(benchmark::State& state) {
    const kcml::Dataset data = blob_data(state.range(0), 20, 11);
    kcml::MetricMatrix metric;
    metric.m = kcml::Matrix::identity(20);
    metric.psd_projected = true;
    const kcml::Vector query(20, 0.5);
    for (auto _ : state)
        benchmark::DoNotOptimize(kcml::knn_classify(metric, data, query, 1));
}
BENCHMARK(BM_KnnQuery)->Arg(512)->Arg(2048);

} // namespace
