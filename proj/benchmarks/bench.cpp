#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include "mcrt/map_builder.hpp"
#include "mcrt/multigraph.hpp"
#include "mcrt/resistance.hpp"
#include "mcrt/walk.hpp"
#include "mcrt/walker.hpp"

namespace {

mcrt::WalkParams params_for(std::int64_t window) {
    mcrt::WalkParams p;
    p.gamma = std::sqrt(2.0);
    p.window_n = window;
    p.seed = 1;
    return p;
}

struct SharedMap {
    mcrt::MultiGraph graph;
    std::uint32_t root;
};

// one shared mid-sized map for the graph-algorithm benchmarks
const SharedMap& shared_map() {
    static const SharedMap m = [] {
        const mcrt::MatedCrtGraph g =
            mcrt::build_adjacency(mcrt::generate_walk(params_for(100000)));
        return SharedMap{mcrt::to_multigraph(g), g.root()};
    }();
    return m;
}

void BM_generate_walk(benchmark::State& state) {
    const mcrt::WalkParams p = params_for(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mcrt::generate_walk(p));
    }
    state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_generate_walk)->Arg(10000)->Arg(100000);

void BM_build_adjacency(benchmark::State& state) {
    const mcrt::CorrelatedWalk walk = mcrt::generate_walk(params_for(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mcrt::build_adjacency(walk));
    }
    state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_build_adjacency)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_bfs_ball(benchmark::State& state) {
    const SharedMap& m = shared_map();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mcrt::bfs_ball(m.graph, m.root, static_cast<std::int32_t>(state.range(0))));
    }
}
BENCHMARK(BM_bfs_ball)->Arg(16)->Arg(32)->Arg(64);

void BM_ball_resistance(benchmark::State& state) {
    const mcrt::MultiGraph& g = shared_map().graph;
    const auto r = static_cast<std::int32_t>(state.range(0));
    const auto dist = mcrt::bfs_distances(g, shared_map().root);
    std::vector<std::uint32_t> members;
    std::vector<std::uint32_t> sphere;
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
        if (dist[v] < 0 || dist[v] > r + 1) continue;
        if (dist[v] == r + 1) sphere.push_back(static_cast<std::uint32_t>(members.size()));
        members.push_back(v);
    }
    const mcrt::InducedSubgraph sub = mcrt::induced_subgraph(g, members);
    const auto root_it = std::lower_bound(sub.to_parent.begin(),
                                          sub.to_parent.end(), shared_map().root);
    const auto root = static_cast<std::uint32_t>(root_it - sub.to_parent.begin());
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mcrt::effective_resistance(sub.graph, root, sphere, 1e-8));
    }
}
BENCHMARK(BM_ball_resistance)->Arg(16)->Arg(32);

void BM_return_prob_exact(benchmark::State& state) {
    const SharedMap& m = shared_map();
    const auto n_max = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mcrt::return_prob_exact(m.graph, m.root, n_max, 1e-15, 1e-9));
    }
    state.SetItemsProcessed(state.iterations() * 2 * n_max);
}
BENCHMARK(BM_return_prob_exact)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_green_mc(benchmark::State& state) {
    const SharedMap& m = shared_map();
    for (auto _ : state) {
        benchmark::DoNotOptimize(mcrt::green_mc(m.graph, m.root,
                                                static_cast<std::uint64_t>(1000),
                                                state.range(0), 7));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_green_mc)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
