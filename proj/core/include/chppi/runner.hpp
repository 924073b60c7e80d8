#pragma once

#include <string>
#include <vector>

#include "chppi/config.hpp"

namespace chppi {

// Stage names in dependency order:
// ingest, housing, affinity, access, sei, vulnerability, index, select, emit
const std::vector<std::string>& pipeline_stages();

struct RunOptions {
  bool force = false;  // recompute even when the stage outputs already exist
  bool quiet = false;  // suppress per-stage progress lines on stderr
};

// Run one stage against persisted intermediates under cfg.output_dir.
// Prerequisite stage outputs must already exist; a clear validation error
// names the stage to run first. Each stage records row counts and itemized
// drops in <output_dir>/manifest.json.
void run_stage(const PipelineConfig& cfg, const std::string& stage, const RunOptions& opt = {});

// All stages in order. Stages whose outputs are all present are skipped
// unless force is set. Outputs are deterministic in (config, seed): a rerun
// over the same inputs writes byte-identical files.
void run_pipeline(const PipelineConfig& cfg, const RunOptions& opt = {});

struct EmitOptions {
  std::string layer = "ChPPI";        // AI | HV | ChPPI | selection
  bool aggregate_localities = false;  // population-weighted locality mean (display option)
  std::string out_path;               // default <output_dir>/<layer>.geojson
};

// Write one choropleth layer from persisted stage outputs; returns the path
// written.
std::string emit_layer(const PipelineConfig& cfg, const EmitOptions& opt = {});

}  // namespace chppi
