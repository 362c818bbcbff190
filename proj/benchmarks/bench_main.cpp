#include "nsis/coupling.hpp"
#include "nsis/exact.hpp"
#include "nsis/random_graphs.hpp"
#include "nsis/rng.hpp"
#include "nsis/sis.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace nsis;

Params recipe(std::size_t n, std::size_t max_degree)
{
    const double kappa = 1.0 / (8.0 * static_cast<double>(n - 1));
    return {1.0 - kappa / 2.0, max_degree ? kappa / (4.0 * static_cast<double>(max_degree)) : 0.0, kappa};
}

void BM_ChainStep(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const MultiGraph g = gen_regular_multigraph(n, 3, 7);
    const SisChain chain(g, recipe(n, g.max_degree()));
    Configuration s(n);
    rng_t rng = make_stream(7, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(chain.step(s, rng));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ChainStep)->Arg(100)->Arg(10'000);

void BM_CoupledStep(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const MultiGraph g = gen_regular_multigraph(n, 3, 7);
    const CoupledChain chain(g, recipe(n, g.max_degree()), CouplingKind::PaperIndependent);
    CoupledState s(Configuration::all_susceptible(n), Configuration::all_infected(n));
    rng_t rng = make_stream(7, 0);
    for (auto _ : state) {
        chain.step(s, rng);
        if (s.coalesced)
            s = CoupledState(Configuration::all_susceptible(n), Configuration::all_infected(n));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CoupledStep)->Arg(100)->Arg(1600);

void BM_CoalescenceTime(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const MultiGraph g = MultiGraph::edgeless(n);
    const Params p = recipe(n, 0);
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(coalescence_time(g, p, Configuration::all_susceptible(n),
                                                  Configuration::all_infected(n),
                                                  CouplingKind::PaperIndependent, ++seed, 1u << 30));
}
BENCHMARK(BM_CoalescenceTime)->Arg(100)->Arg(1600)->Unit(benchmark::kMicrosecond);

void BM_BuildKernel(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const MultiGraph g = MultiGraph::path(n);
    const Params p = recipe(n, g.max_degree());
    for (auto _ : state)
        benchmark::DoNotOptimize(build_kernel(g, p));
}
BENCHMARK(BM_BuildKernel)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Stationary(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const MultiGraph g = MultiGraph::path(n);
    const Kernel k = build_kernel(g, recipe(n, g.max_degree()));
    for (auto _ : state)
        benchmark::DoNotOptimize(stationary(k));
}
BENCHMARK(BM_Stationary)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_BuildCoupledKernel(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const MultiGraph g = MultiGraph::cycle(n);
    const Params p = recipe(n, g.max_degree());
    for (auto _ : state)
        benchmark::DoNotOptimize(build_coupled_kernel(g, p, CouplingKind::PaperIndependent));
}
BENCHMARK(BM_BuildCoupledKernel)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_ErdosRenyi(benchmark::State& state)
{
    std::uint64_t seed = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(gen_erdos_renyi(1000, 0.05, ++seed));
}
BENCHMARK(BM_ErdosRenyi)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
