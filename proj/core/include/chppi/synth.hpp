#pragma once

#include <cstdint>
#include <string>

namespace chppi {

// Knobs for the synthetic test world. Defaults give a desk-scale scenario that
// runs the whole pipeline in well under a minute yet exercises every stage.
struct SynthOptions {
  int blocks = 500;
  int users = 10000;
  int providers = 30;
  // Probability that a user homed in a planted block keeps a contact inside
  // the endemic strip. 0 disables every cross-region call, so the affinity
  // index of each non-endemic block is exactly zero.
  double endemic_contact_rate = 0.7;
  std::uint64_t seed = 1;
};

struct SynthSummary {
  int blocks = 0;
  int antennas = 0;
  int users = 0;
  int providers = 0;
  int cdr_rows = 0;
  int households = 0;
  int street_nodes = 0;
  int street_edges = 0;
};

// Writes a complete, self-consistent input set under out_dir: block and region
// geometry, antennas, call records, housing tallies, provider roster and label
// rules, street graph, household survey plus schema, a ready-to-run
// config.json, and ground truth under out_dir/ground_truth (true home
// antennas, household latents, planted/null block labels).
//
// Throws Errc::scale_too_small when the requested scale cannot support the
// pipeline (fewer than 10 blocks, 10 users, 3 providers, or fewer than 4
// antenna tiles inside the endemic strip).
SynthSummary generate_synthetic_world(const std::string& out_dir, const SynthOptions& opt);

}  // namespace chppi
