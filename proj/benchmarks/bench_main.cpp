#include "magswim/atlas.hpp"
#include "magswim/dynamics.hpp"
#include "magswim/numerics.hpp"
#include "magswim/regimes.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace magswim;

namespace {

const PDecomposition& swimmer(const std::string& stem)
{
    static const auto a = decompose(load_swimmer_file(std::string(MAGSWIM_DATA_DIR) + "/swimmers/swimmer_A.json"));
    static const auto b = decompose(load_swimmer_file(std::string(MAGSWIM_DATA_DIR) + "/swimmers/swimmer_B.json"));
    return stem == "A" ? a : b;
}

void BM_eig3(benchmark::State& state)
{
    Mat3 M;
    M << -1.0, 0.3, 0.2, -0.4, -0.5, 0.7, 0.1, -0.6, 0.2;
    for (auto _ : state) benchmark::DoNotOptimize(numerics::eig3(M));
}
BENCHMARK(BM_eig3);

void BM_solve_equilibria(benchmark::State& state)
{
    const auto& d = swimmer("A");
    for (auto _ : state) benchmark::DoNotOptimize(atlas::solve_equilibria(d, 0.015, 0.01));
}
BENCHMARK(BM_solve_equilibria);

void BM_regime_diagram(benchmark::State& state)
{
    const auto& d = swimmer("B");
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(regimes::regime_diagram(d, 0.0, 1.0, -1.0, 1.0, n, n, 1));
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_regime_diagram)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_integrate(benchmark::State& state)
{
    const auto& d = swimmer("A");
    const Vec4 q0 = dynamics::random_orientation(42, 0);
    dynamics::IntegrateOptions o;
    o.output_dt = 100.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(dynamics::integrate_orientation(d, q0, 0.015, 0.01, 1000.0, 1e-10, o));
}
BENCHMARK(BM_integrate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
