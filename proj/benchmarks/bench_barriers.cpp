#include <benchmark/benchmark.h>

#include "dmalab/barriers.hpp"

using namespace dmalab;

namespace {

Vec point(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

void BM_EdgeEvaluate(benchmark::State& state) {
    const EdgeBarrier e = edge_barrier_params(2, 1, 3, 1, 1);
    const Vec x = point(0.2, 0.3);
    for (auto _ : state) benchmark::DoNotOptimize(e.evaluate(x).det);
}
BENCHMARK(BM_EdgeEvaluate);

void BM_CuspEvaluate(benchmark::State& state) {
    const CuspBarrier c = cusp_barrier_params(2, 2, 3, 1, 4, 1);
    const Vec x = point(0.1, 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(c.evaluate(x).det);
}
BENCHMARK(BM_CuspEvaluate);

void BM_SphereRecipe(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(sphere_barrier_params(2, 2, 3, 1, 1, BarrierSide::Sub).M);
}
BENCHMARK(BM_SphereRecipe);

void BM_CertifyEdgeOnSquare(benchmark::State& state) {
    const ConvexDomain sq = ConvexDomain::box(Vec::Zero(2), Vec::Ones(2));
    EdgeBarrier e = edge_barrier_params(2, 1, 3, 1, sq.diameter());
    e.frame = LocalFrame::from_direction(point(0.5, 0), point(0, 1));
    const PowerLawRHS F(1, 1, 3, std::make_shared<const ConvexDomain>(sq));
    for (auto _ : state) benchmark::DoNotOptimize(verify_subsolution(e, F, sq, state.range(0)).passed);
}
BENCHMARK(BM_CertifyEdgeOnSquare)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
