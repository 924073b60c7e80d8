#pragma once

#include <map>
#include <string>
#include <vector>

namespace chppi {

// Final index assembly: health vulnerability from travel time and the
// socio-economic score, CDF-scaled population density, the normalized
// product index, and the locality shortlist.

struct HvResult {
  std::map<std::string, double> hv;        // block -> [0,1]
  std::vector<std::string> imputed;        // blocks whose travel time was capped
  double first_component_share = 0.0;
  bool cdf_fallback = false;
};

// Two-column rank PCA of (travel minutes, socio-economic level), first
// component oriented to grow with travel time, mapped through a smooth CDF.
// Blocks present in only one input are ignored; non-finite travel times are
// imputed at the maximum finite value and flagged. Throws degenerate_matrix
// when either column is constant, domain_error below 10 usable blocks.
HvResult health_vulnerability(const std::map<std::string, double>& delta,
                              const std::map<std::string, double>& eta);

struct DensityInput {
  double population = 0.0;
  double area_km2 = 0.0;
};

struct DensityResult {
  std::map<std::string, double> d;         // block -> [0,1]
  std::vector<std::string> zero_area;      // excluded blocks
  bool cdf_fallback = false;
};

// CDF of population density evaluated per block. Zero-area blocks are
// excluded and flagged.
DensityResult density_scale(const std::map<std::string, DensityInput>& blocks);

struct IndexInputs {
  double hv = 0.0;
  double d = 0.0;
  double ai = 0.0;
};

// Relative prevalence proxy: HV^alpha * d^beta * AI, divided by its own
// mean over the included blocks, so the result averages exactly 1. With
// alpha = beta = 0 this collapses bit-for-bit to AI / mean(AI). Throws
// all_zero_affinity when every AI is zero.
std::map<std::string, double> chppi_index(const std::map<std::string, IndexInputs>& blocks,
                                          double alpha, double beta);

struct SelectionParams {
  double min_block_pop = 350.0;
  double min_density_km2 = 350.0;
  double extreme_percentile = 0.95;
  int top_n = 3;
};

struct SelectionBlock {
  std::string block_id;
  std::string locality_id;
  std::string province_id;
  double ai = 0.0;
  double population = 0.0;
  double area_km2 = 0.0;
  bool in_endemic = false;
};

enum class LocalityType { none, high_mean, extreme_blocks, both };

const char* locality_type_name(LocalityType t);

struct LocalityReport {
  std::string locality_id;
  std::string province_id;
  double metric1 = 0.0;        // population-weighted mean affinity
  double metric2 = 0.0;        // mean affinity over the locality's extreme blocks
  bool has_extreme = false;
  LocalityType type = LocalityType::none;
  bool selected = false;
};

// Locality shortlist: drop endemic blocks, blocks under the population
// floor, and blocks under the density floor; rank localities per province
// by metric1 and, among localities holding blocks above the national
// affinity percentile, by metric2; keep the top_n of each ranking. Ties
// prefer the lexicographically smaller locality id. One report per
// surviving locality, ordered by (province, locality).
std::vector<LocalityReport> select_localities(const std::vector<SelectionBlock>& blocks,
                                              const SelectionParams& params = {});

}  // namespace chppi
