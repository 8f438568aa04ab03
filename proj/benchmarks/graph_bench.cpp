#include <benchmark/benchmark.h>

#include "trailmine/trail_graph.hpp"
#include "workload.hpp"

using namespace trailmine;

static void BM_AddSession(benchmark::State& state)
{
    const auto sessions = bench::sessions(static_cast<std::size_t>(state.range(0)), 60, 5000);
    const auto table = WeightTable::defaults();
    for (auto _ : state) {
        TrailGraph g;
        for (const auto& s : sessions) g.add_session(s, table);
        benchmark::DoNotOptimize(g.edge_count());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 60);
}
BENCHMARK(BM_AddSession)->Arg(100)->Arg(1000);

static void BM_Snapshot(benchmark::State& state)
{
    TrailGraph g;
    for (const auto& s : bench::sessions(static_cast<std::size_t>(state.range(0)), 60, 5000)) {
        g.add_session(s, WeightTable::defaults());
    }
    for (auto _ : state) benchmark::DoNotOptimize(snapshot(g));
    state.counters["edges"] = static_cast<double>(g.edge_count());
}
BENCHMARK(BM_Snapshot)->Arg(1000);

static void BM_LoadSnapshot(benchmark::State& state)
{
    TrailGraph g;
    for (const auto& s : bench::sessions(1000, 60, 5000)) g.add_session(s, WeightTable::defaults());
    const auto bytes = snapshot(g);
    for (auto _ : state) benchmark::DoNotOptimize(load_snapshot(bytes));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_LoadSnapshot);
