#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "chppi/autoencoder.hpp"
#include "chppi/rng.hpp"
#include "chppi/stats.hpp"

namespace {

std::vector<double> random_values(int n, std::uint64_t seed) {
  chppi::Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.normal();
  return v;
}

void BM_rankit(benchmark::State& state) {
  std::vector<double> v = random_values(int(state.range(0)), 31);
  for (auto _ : state) {
    std::vector<double> r = chppi::rankit(v);
    benchmark::DoNotOptimize(r.front());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_rankit)->Arg(1000)->Arg(10000)->Arg(100000)->Complexity();

void BM_spca(benchmark::State& state) {
  const int n = int(state.range(0));
  chppi::Rng rng(37);
  Eigen::MatrixXd x(n, 8);
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    for (int j = 0; j < 8; ++j) x(i, j) = 0.5 * z + rng.normal();
  }
  for (auto _ : state) {
    chppi::SpcaResult r = chppi::spca(x);
    benchmark::DoNotOptimize(r.explained(0));
  }
}
BENCHMARK(BM_spca)->Arg(500)->Arg(5000);

void BM_tukey_trimean(benchmark::State& state) {
  std::vector<double> v = random_values(int(state.range(0)), 41);
  for (auto _ : state) benchmark::DoNotOptimize(chppi::tukey_trimean(v));
}
BENCHMARK(BM_tukey_trimean)->Arg(10000);

void BM_autoencoder_epoch(benchmark::State& state) {
  const int rows = int(state.range(0));
  chppi::OrdinalSchema schema;
  for (int v = 1; v <= 5; ++v) schema.variables.push_back({"v" + std::to_string(v), 6});
  chppi::Rng rng(43);
  std::vector<std::vector<int>> data;
  for (int i = 0; i < rows; ++i) {
    double u = rng.uniform();
    std::vector<int> row;
    for (int v = 0; v < 5; ++v) row.push_back(std::min(1 + int(u * 6), 6));
    data.push_back(row);
  }
  Eigen::MatrixXd x = chppi::encode_thermometer(schema, data);
  chppi::AutoencoderConfig cfg;
  cfg.epochs = 1;
  cfg.batch = 64;
  for (auto _ : state) {
    chppi::AutoencoderModel m = chppi::train_autoencoder(x, cfg);
    benchmark::DoNotOptimize(m.epoch_loss.back());
  }
}
BENCHMARK(BM_autoencoder_epoch)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
