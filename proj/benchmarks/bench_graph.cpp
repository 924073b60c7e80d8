#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "chppi/health_access.hpp"

namespace {

chppi::StreetGraph grid_graph(int n, double step) {
  std::vector<chppi::StreetNode> nodes;
  std::vector<chppi::StreetEdge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::string id = "n" + std::to_string(i) + "_" + std::to_string(j);
      nodes.push_back({id, {step * i, step * j}});
      if (i + 1 < n)
        edges.push_back({id, "n" + std::to_string(i + 1) + "_" + std::to_string(j), step});
      if (j + 1 < n)
        edges.push_back({id, "n" + std::to_string(i) + "_" + std::to_string(j + 1), step});
    }
  return chppi::StreetGraph::build(nodes, edges);
}

void BM_shortest_paths(benchmark::State& state) {
  const int n = int(state.range(0));
  chppi::StreetGraph g = grid_graph(n, 80.0);
  for (auto _ : state) {
    std::vector<double> d = g.shortest_paths(0);
    benchmark::DoNotOptimize(d.back());
  }
  state.SetComplexityN(n * n);
}
BENCHMARK(BM_shortest_paths)->Arg(20)->Arg(40)->Arg(80)->Complexity();

void BM_nearest_node(benchmark::State& state) {
  chppi::StreetGraph g = grid_graph(60, 80.0);
  double x = 17.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(g.nearest_node({x, 4000.0 - x}));
    x += 31.0;
    if (x > 4700.0) x -= 4700.0;
  }
}
BENCHMARK(BM_nearest_node);

}  // namespace
