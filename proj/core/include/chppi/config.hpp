#pragma once

#include <cstdint>
#include <string>

#include "chppi/affinity.hpp"
#include "chppi/geojson.hpp"

namespace chppi {

// Declarative run description. Paths are stored resolved (relative entries
// are taken against the config file's directory).
struct PipelineConfig {
  // inputs
  std::string antennas;
  std::string cdr;
  std::string blocks;
  std::string boundary;
  std::string endemic_region;
  std::string housing;
  std::string providers;
  std::string provider_labels;
  std::string street_nodes;
  std::string street_edges;
  std::string households;
  std::string household_schema;

  std::string output_dir;

  Projection projection;

  std::uint64_t seed = 1;
  int threads = 1;
  double alpha = 1.0;
  double beta = 1.0;

  // affinity stage
  std::int64_t min_edge_calls = 1;
  bool include_self = true;
  NightWindow night_window;

  // access stage
  double speed_kmh = 5.0;
  int knn_candidates = 10;
  int sample_points = 5;

  // socio-economic stage
  int ae_d1 = 0;
  double ae_dropout = 0.5;
  int ae_epochs = 60;
  int ae_batch = 64;
  double ae_learning_rate = 1e-3;

  // index stage
  bool denominator_includes_endemic = false;

  // selection stage
  double min_block_pop = 350.0;
  double min_density_km2 = 350.0;
  double extreme_percentile = 0.95;
  int top_n = 3;

  std::string source_path;          // where the config was loaded from
  std::uint64_t config_hash = 0;    // hash of the raw config bytes
};

// Parse without touching the referenced files. Throws validation on
// malformed JSON or out-of-range values.
PipelineConfig load_config(const std::string& path);

// Existence and range checks for a run. Throws validation naming the first
// missing path.
void validate_config(const PipelineConfig& cfg);

// Serialized form used by the world generator to write runnable configs.
std::string config_to_json(const PipelineConfig& cfg);

}  // namespace chppi
