// Serial DFS / BFS against the OpenMP BFS on case-study networks that
// complete without deadlock, so every order visits the whole state space.
#include <benchmark/benchmark.h>

#include "midlearn/casestudies.hpp"

using namespace midlearn;

namespace {

void run(benchmark::State& st, SearchOrder order) {
  const auto n = static_cast<unsigned>(st.range(0));
  const auto size = static_cast<unsigned>(st.range(1));
  auto net = build_case2(case2_params(n, n, n, size, false));
  SearchLimits l;
  l.order = order;
  std::size_t states = 0;
  for (auto _ : st) {
    auto v = find_deadlock(net, l);
    if (v.conclusion != Conclusion::ok) st.SkipWithError("unexpected verdict");
    states = v.states_explored;
  }
  st.counters["states"] = static_cast<double>(states);
  st.counters["states/s"] = benchmark::Counter(static_cast<double>(states), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_Dfs(benchmark::State& st) { run(st, SearchOrder::dfs); }
void BM_Bfs(benchmark::State& st) { run(st, SearchOrder::bfs); }
void BM_ParallelBfs(benchmark::State& st) { run(st, SearchOrder::parallel_bfs); }

void shapes(benchmark::internal::Benchmark* b) {
  b->Args({20, 1})->Args({50, 6})->Args({100, 6})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Dfs)->Apply(shapes);
BENCHMARK(BM_Bfs)->Apply(shapes);
BENCHMARK(BM_ParallelBfs)->Apply(shapes);

BENCHMARK_MAIN();
