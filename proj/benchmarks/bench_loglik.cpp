#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "wmgraph/likelihood.hpp"
#include "wmgraph/simulation.hpp"

using namespace wmgraph;

namespace {

MetricGraph grid(int side) {
    std::vector<Vertex> vs;
    std::vector<EdgeRecord> es;
    auto id = [side](int i, int j) { return static_cast<std::int64_t>(j * side + i); };
    for (int j = 0; j < side; ++j)
        for (int i = 0; i < side; ++i) vs.push_back({id(i, j), double(i), double(j)});
    std::int64_t eid = 0;
    for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
            if (i + 1 < side) es.push_back({eid++, id(i, j), id(i + 1, j), 1.0});
            if (j + 1 < side) es.push_back({eid++, id(i, j), id(i, j + 1), 1.0});
        }
    }
    return MetricGraph::build(vs, es);
}

ModelParams model(int alpha) {
    ModelParams p;
    p.alpha = alpha;
    p.kappa = 1.5;
    p.sigma = 0.5;
    return p;
}

// state.range(0) is the number of observations on a 6 x 6 grid
void run(benchmark::State& state, LoglikMethod method, int alpha) {
    const MetricGraph g = grid(6);
    const ModelParams p = model(alpha);
    const auto locs = uniform_locations(g, static_cast<int>(state.range(0)), 1);
    const ObservationSet obs = simulate_observations(locs, simulate_field(g, p, locs, 2), p.sigma, 3);
    const auto eval = make_loglik(method, g, obs);
    for (auto _ : state) benchmark::DoNotOptimize((*eval)(p));
    state.SetComplexityN(state.range(0));
}

void BM_dense_alpha1(benchmark::State& s) { run(s, LoglikMethod::dense, 1); }
void BM_extended_alpha1(benchmark::State& s) { run(s, LoglikMethod::extended, 1); }
void BM_bridge_alpha1(benchmark::State& s) { run(s, LoglikMethod::bridge, 1); }
void BM_constrained_alpha2(benchmark::State& s) { run(s, LoglikMethod::constrained, 2); }

}  // namespace

BENCHMARK(BM_dense_alpha1)->RangeMultiplier(2)->Range(64, 1024)->Complexity();
BENCHMARK(BM_extended_alpha1)->RangeMultiplier(2)->Range(64, 4096)->Complexity();
BENCHMARK(BM_bridge_alpha1)->RangeMultiplier(2)->Range(64, 4096)->Complexity();
BENCHMARK(BM_constrained_alpha2)->RangeMultiplier(2)->Range(64, 4096)->Complexity();
BENCHMARK_MAIN();
