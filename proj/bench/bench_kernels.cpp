// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <random>

#include "fixtures.hpp"
#include "freeshell/energy.hpp"
#include "freeshell/reference/distance_serial.hpp"
#include "freeshell/reference/energy_serial.hpp"
#include "freeshell/reference/overlap_serial.hpp"
#include "freeshell/verify.hpp"

using namespace freeshell;

namespace
{

Layout grid_layout(int n)
{
    const TargetMesh mesh = fixtures::square_grid(n, n, 10.0);
    Layout layout = fixtures::planar_layout(mesh);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (Vec2& c : layout.corners) {
        c += layout.avg_edge * Vec2(u(rng), u(rng));
    }
    return layout;
}

std::vector<Vec3> random_points(int n, double extent)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, extent);
    std::vector<Vec3> pts(n);
    for (Vec3& p : pts) {
        p = Vec3(u(rng), u(rng), u(rng) - 0.5 * extent);
    }
    return pts;
}

void BM_EnergyParallel(benchmark::State& state)
{
    const Layout layout = grid_layout(static_cast<int>(state.range(0)));
    EnergyParams p;
    p.d = 0.9;
    const EnergyEvaluator eval(layout, p);
    const std::vector<double> x = corner_coordinates(layout);
    std::vector<double> g(x.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval(x, g).total);
    }
}

void BM_EnergySerial(benchmark::State& state)
{
    const Layout layout = grid_layout(static_cast<int>(state.range(0)));
    EnergyParams p;
    p.d = 0.9;
    const std::vector<double> x = corner_coordinates(layout);
    std::vector<double> g(x.size());
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::energy_serial(layout, x, p, g).total);
    }
}

void BM_DistanceBvh(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const TargetMesh mesh = fixtures::square_grid(n, n, 10.0);
    const auto pts = random_points(2000, 10.0 * n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(point_to_mesh_distance(pts, mesh).avg);
    }
}

void BM_DistanceSerial(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const TargetMesh mesh = fixtures::square_grid(n, n, 10.0);
    const auto pts = random_points(2000, 10.0 * n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::distance_serial(pts, mesh).avg);
    }
}

void BM_OverlapGrid(benchmark::State& state)
{
    const Layout layout = grid_layout(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(count_overlap_pairs(layout));
    }
}

void BM_OverlapSerial(benchmark::State& state)
{
    const Layout layout = grid_layout(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::overlap_pairs_serial(layout));
    }
}

}  // namespace

BENCHMARK(BM_EnergyParallel)->Arg(20)->Arg(60);
BENCHMARK(BM_EnergySerial)->Arg(20)->Arg(60);
BENCHMARK(BM_DistanceBvh)->Arg(10)->Arg(30);
BENCHMARK(BM_DistanceSerial)->Arg(10)->Arg(30);
BENCHMARK(BM_OverlapGrid)->Arg(10)->Arg(30);
BENCHMARK(BM_OverlapSerial)->Arg(10)->Arg(30);

BENCHMARK_MAIN();
