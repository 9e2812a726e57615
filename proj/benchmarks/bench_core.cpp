#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "infill/fem.hpp"
#include "infill/fields.hpp"
#include "infill/mma.hpp"
#include "infill/optimizer.hpp"

using namespace infill;

namespace {

std::vector<double> random_vector(std::size_t n, double lo, double hi, unsigned seed) {
    std::mt19937 rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * (static_cast<double>(rng()) / 4294967296.0);
    return v;
}

Problem cantilever(int nx, int ny) {
    Problem p;
    p.grid = build_grid(nx, ny);
    p.domain = DomainMask::all_inside(p.grid);
    p.passive = PassiveMask::none(p.grid);
    for (int j = 0; j <= ny; ++j) p.bcs.add_fixed_node(p.grid, 0, j, true, true);
    p.bcs.loads.push_back({p.grid.node_index(nx, ny / 2), 1, -1.0});
    p.bcs.normalize();
    return p;
}

}  // namespace

static void BM_ApplyStiffness(benchmark::State& state) {
    const Grid g = build_grid(400, 200);
    const Matrix8 k0 = element_stiffness(0.3);
    const auto E = random_vector(static_cast<std::size_t>(g.num_elements()), 1e-9, 1.0, 1);
    const auto u = random_vector(static_cast<std::size_t>(g.num_dofs()), -1.0, 1.0, 2);
    std::vector<double> out(u.size());
    for (auto _ : state) {
        apply_stiffness(g, k0, E, u, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * g.num_elements());
}
BENCHMARK(BM_ApplyStiffness)->Unit(benchmark::kMicrosecond);

static void BM_SmoothFilter(benchmark::State& state) {
    const Grid g = build_grid(400, 200);
    const auto mask = in_domain_mask(g, DomainMask::all_inside(g));
    const KernelMap map(g, make_smooth_kernel(2.0), mask, mask);
    const auto x = random_vector(static_cast<std::size_t>(g.num_elements()), 0.0, 1.0, 3);
    std::vector<double> out(x.size());
    for (auto _ : state) {
        map.average(x, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_SmoothFilter)->Unit(benchmark::kMicrosecond);

static void BM_LocalVolume(benchmark::State& state) {
    const Grid g = build_grid(400, 200);
    const auto mask = in_domain_mask(g, DomainMask::all_inside(g));
    const KernelMap map(g, make_volume_kernel(6.0), mask, mask);
    const auto x = random_vector(static_cast<std::size_t>(g.num_elements()), 0.0, 1.0, 4);
    std::vector<double> out(x.size());
    for (auto _ : state) {
        map.average(x, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_LocalVolume)->Unit(benchmark::kMicrosecond);

static void BM_Project(benchmark::State& state) {
    const auto x = random_vector(80000, 0.0, 1.0, 5);
    for (auto _ : state) {
        auto out = project(x, 8.0);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_Project)->Unit(benchmark::kMicrosecond);

static void BM_StateSolve(benchmark::State& state) {
    const Problem p = cantilever(120, 60);
    FemSystem fem(p.grid, p.bcs, p.material, 1e-6, 50000);
    const auto rho = random_vector(static_cast<std::size_t>(p.grid.num_elements()), 0.1, 1.0, 6);
    fem.set_densities(rho);
    for (auto _ : state) {
        std::vector<double> u;
        const SolveInfo info = fem.solve(u);
        benchmark::DoNotOptimize(info.iterations);
    }
    state.SetLabel("cold start, rel tol 1e-6");
}
BENCHMARK(BM_StateSolve)->Unit(benchmark::kMillisecond);

static void BM_MmaUpdate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    MmaSolver mma(n, 2);
    std::vector<double> x(static_cast<std::size_t>(n), 0.5);
    const auto df = random_vector(static_cast<std::size_t>(n), -1.0, 0.0, 7);
    auto dg = random_vector(static_cast<std::size_t>(2 * n), 0.0, 1.0, 8);
    const std::vector<double> g = {0.02, -0.01};
    for (auto _ : state) {
        mma.update(x, df, g, dg);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MmaUpdate)->Arg(20000)->Arg(80000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
