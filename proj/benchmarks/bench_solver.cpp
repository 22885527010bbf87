#include <benchmark/benchmark.h>

#include "dmalab/radial.hpp"
#include "dmalab/solver.hpp"

using namespace dmalab;

namespace {

std::shared_ptr<const ConvexDomain> disk() {
    return std::make_shared<const ConvexDomain>(ConvexDomain::ball(Vec::Zero(2), 1.0));
}

void BM_FixedRhsDisk(benchmark::State& state) {
    const auto g = std::make_shared<const Grid2D>(discretize_domain(disk(), 1.0 / state.range(0)));
    const std::vector<double> f(g->size(), 4.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_rhs(g, f).values.front());
    state.counters["nodes"] = static_cast<double>(g->size());
}
BENCHMARK(BM_FixedRhsDisk)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SingularDisk(benchmark::State& state) {
    const auto D = disk();
    const auto g = std::make_shared<const Grid2D>(discretize_domain(D, 1.0 / state.range(0)));
    const PowerLawRHS F(1, 2, 3, D);
    for (auto _ : state) benchmark::DoNotOptimize(solve_singular(g, F).values.front());
}
BENCHMARK(BM_SingularDisk)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_RadialOracle(benchmark::State& state) {
    const PowerLawRHS F(1, 2, 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(radial_solve(F, 1.0).center_value);
}
BENCHMARK(BM_RadialOracle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
