#include <benchmark/benchmark.h>

#include "trailmine/recommender.hpp"
#include "workload.hpp"

using namespace trailmine;

namespace {

struct Fixture {
    TrailGraph graph;
    SessionState live;

    explicit Fixture(std::size_t sessions)
    {
        const auto table = WeightTable::defaults();
        for (const auto& s : bench::sessions(sessions, 60, 5000)) graph.add_session(s, table);
        live.session_id = "live";
        const auto history = bench::sessions(1, 12, 5000, 99);
        for (auto e : history[0].events) {
            e.session_id = "live";
            live = update_state(std::move(live), e, table);
        }
    }
};

}  // namespace

static void BM_RecommendDocuments(benchmark::State& state)
{
    static const Fixture f(1000);
    RecParams p;
    p.depth = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(recommend_documents(f.graph, f.live, p));
}
BENCHMARK(BM_RecommendDocuments)->DenseRange(1, 3);

static void BM_Activate(benchmark::State& state)
{
    static const Fixture f(1000);
    RecParams p;
    p.depth = 3;
    const auto seeds = seed_weights(f.live, p.recency_decay);
    for (auto _ : state) benchmark::DoNotOptimize(activate(f.graph, seeds, p));
}
BENCHMARK(BM_Activate);
