// Parallel kernels against the serial reference implementation.
#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "spatiofd/changepoint.hpp"
#include "spatiofd/kernels.hpp"
#include "spatiofd/reference.hpp"
#include "spatiofd/simgen.hpp"

using namespace spatiofd;

namespace {

const SimulatedData& sample(std::size_t p) {
    static std::map<std::size_t, SimulatedData> cache;
    auto it = cache.find(p);
    if (it == cache.end()) {
        SimulationConfig cfg;
        cfg.n = 100;
        cfg.p = p;
        cfg.seed = 7;
        it = cache.emplace(p, simulate(cfg)).first;
    }
    return it->second;
}

RowMatrix basis(const SpatialFunctionalDataset& data, int r) {
    RowMatrix psi(r, static_cast<Eigen::Index>(data.t()));
    for (int k = 0; k < r; ++k) {
        psi.row(k) = fourier_eigenfunction(k + 1, data.grid()).transpose();
    }
    return psi;
}

void BM_DifferenceGram(benchmark::State& state) {
    const auto& d = sample(static_cast<std::size_t>(state.range(0))).data;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::difference_gram(d));
    }
}

void BM_DifferenceGramReference(benchmark::State& state) {
    const auto& d = sample(static_cast<std::size_t>(state.range(0))).data;
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::difference_gram(d));
    }
}

void BM_ProjectedDifferences(benchmark::State& state) {
    const auto& d = sample(static_cast<std::size_t>(state.range(0))).data;
    const auto psi = basis(d, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::projected_differences(d, psi));
    }
}

void BM_ProjectedDifferencesReference(benchmark::State& state) {
    const auto& d = sample(static_cast<std::size_t>(state.range(0))).data;
    const auto psi = basis(d, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::projected_differences(d, psi));
    }
}

RowMatrix random_eta(std::size_t p) {
    Rng rng = make_stream(3, {p});
    std::normal_distribution<double> normal;
    RowMatrix eta(99 * 4, static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        eta.data()[i] = normal(rng);
    }
    return eta;
}

void BM_QuadraticProfile(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const auto eta = random_eta(p);
    const auto K = build_kernel_matrix(sample(p).data.domain(), 0.2).entries;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::quadratic_profile(eta, 4, &K));
    }
}

void BM_QuadraticProfileReference(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const auto eta = random_eta(p);
    const auto K = build_kernel_matrix(sample(p).data.domain(), 0.2).entries;
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::quadratic_profile(eta, 4, &K));
    }
}

void BM_NullSimulation(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const auto K = build_kernel_matrix(sample(p).data.domain(), 0.2).entries;
    std::vector<std::vector<Matrix>> forms{std::vector<Matrix>(4, K)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::simulate_bridge_functionals(forms, 100, 20, 1));
    }
}

void BM_NullSimulationReference(benchmark::State& state) {
    const auto p = static_cast<std::size_t>(state.range(0));
    const auto K = build_kernel_matrix(sample(p).data.domain(), 0.2).entries;
    const std::vector<Matrix> roots(4, Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    const std::vector<std::optional<Matrix>> kernels{K};
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::simulate_bridge_functionals(roots, kernels, 100, 20, 1));
    }
}

} // namespace

BENCHMARK(BM_DifferenceGram)->Arg(50)->Arg(100);
BENCHMARK(BM_DifferenceGramReference)->Arg(50)->Arg(100);
BENCHMARK(BM_ProjectedDifferences)->Arg(50)->Arg(100);
BENCHMARK(BM_ProjectedDifferencesReference)->Arg(50)->Arg(100);
BENCHMARK(BM_QuadraticProfile)->Arg(50)->Arg(100);
BENCHMARK(BM_QuadraticProfileReference)->Arg(50)->Arg(100);
BENCHMARK(BM_NullSimulation)->Arg(50)->Arg(100);
BENCHMARK(BM_NullSimulationReference)->Arg(50)->Arg(100);

BENCHMARK_MAIN();
