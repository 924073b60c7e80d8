#include <benchmark/benchmark.h>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "chppi/geometry.hpp"
#include "chppi/rng.hpp"

namespace {

chppi::Polygon regular_ngon(int n, double radius, double cx, double cy) {
  chppi::Ring ring;
  for (int i = 0; i < n; ++i) {
    double t = 2.0 * M_PI * i / n;
    ring.push_back({cx + radius * std::cos(t), cy + radius * std::sin(t)});
  }
  return chppi::make_polygon(ring);
}

void BM_voronoi_partition(benchmark::State& state) {
  const int sites = int(state.range(0));
  chppi::Rng rng(71);
  std::vector<std::pair<std::string, chppi::Point>> pts;
  for (int i = 0; i < sites; ++i)
    pts.push_back({"s" + std::to_string(i), {rng.uniform(0, 10000), rng.uniform(0, 10000)}});
  chppi::Polygon clip =
      chppi::make_polygon({{0, 0}, {10000, 0}, {10000, 10000}, {0, 10000}});
  for (auto _ : state) {
    chppi::VoronoiDiagram vd = chppi::voronoi_partition(pts, clip);
    benchmark::DoNotOptimize(vd.cells.size());
  }
  state.SetComplexityN(sites);
}
BENCHMARK(BM_voronoi_partition)->Arg(16)->Arg(64)->Arg(256)->Complexity();

void BM_intersection_area(benchmark::State& state) {
  const int verts = int(state.range(0));
  chppi::Polygon a = regular_ngon(verts, 50.0, 0.0, 0.0);
  chppi::Polygon b = regular_ngon(verts, 50.0, 20.0, 15.0);
  for (auto _ : state) benchmark::DoNotOptimize(chppi::intersection_area(a, b));
}
BENCHMARK(BM_intersection_area)->Arg(8)->Arg(32)->Arg(128);

void BM_sample_points(benchmark::State& state) {
  chppi::Polygon p = regular_ngon(24, 300.0, 0.0, 0.0);
  for (auto _ : state) {
    chppi::SampledPoints sp = chppi::sample_points(p, std::size_t(state.range(0)), 9);
    benchmark::DoNotOptimize(sp.points.size());
  }
}
BENCHMARK(BM_sample_points)->Arg(5)->Arg(50);

}  // namespace
