#include <benchmark/benchmark.h>

#include <vector>

#include "basalt/basalt_node.hpp"
#include "basalt/ranking.hpp"
#include "basalt/simnet.hpp"

using namespace basalt;

namespace {

std::vector<NodeId> ids(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(static_cast<std::uint32_t>(rng()));
    return out;
}

const char* const kRankings[] = {"uniform", "grouped16", "hierarchical"};

void BM_Rank(benchmark::State& state) {
    const RankingFunction fn = parse_ranking(kRankings[state.range(0)]);
    Rng rng(1);
    const PreparedSeed seed = fn.prepare(random_seed(rng));
    const auto pool = ids(1024, 2);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(fn.rank(seed, pool[i++ & 1023]));
    }
    state.SetLabel(fn.name());
}
BENCHMARK(BM_Rank)->DenseRange(0, 2);

/// One batch of v candidates presented to all v slots.
void BM_UpdateSample(benchmark::State& state) {
    const RankingFunction fn = parse_ranking(kRankings[state.range(0)]);
    ProtocolParams p;
    p.view_size = static_cast<int>(state.range(1));
    p.replacement_count = p.view_size / 2;
    const auto pool = ids(10000, 3);
    BasaltNode node(NodeId(1), p, fn, std::vector<NodeId>(pool.begin(), pool.begin() + 10), 4);
    std::size_t at = 0;
    for (auto _ : state) {
        if (at + p.view_size > pool.size()) at = 0;
        node.update_sample(std::span(pool).subspan(at, static_cast<std::size_t>(p.view_size)));
        at += static_cast<std::size_t>(p.view_size);
    }
    state.SetItemsProcessed(state.iterations() * p.view_size * p.view_size);
    state.SetLabel(fn.name());
}
BENCHMARK(BM_UpdateSample)->ArgsProduct({{0, 2}, {50, 100, 200}});

/// Whole-network ticks at n = range(0), v = 100, f = 0.1.
void BM_SimTicks(benchmark::State& state) {
    SimConfig c;
    c.n = static_cast<int>(state.range(0));
    c.algorithm = static_cast<Algorithm>(state.range(1));
    c.ticks = 50;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_sim(c));
    }
    state.SetItemsProcessed(state.iterations() * c.ticks);
    state.SetLabel(to_string(c.algorithm) + ", items = ticks");
}
BENCHMARK(BM_SimTicks)->ArgsProduct({{200, 1000}, {0, 2}})->Unit(benchmark::kMillisecond);

} // namespace
