#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "chppi/geometry.hpp"
#include "chppi/types.hpp"

namespace chppi {

// Housing quality from three categorical census variables. A one-dimensional
// correspondence score is fit on household profiles, averaged per block,
// spread onto antenna coverage cells by area-and-household weighting, and
// finally cut into quartiles inside the endemic region.

// Closed category vocabularies. Order matters: it fixes indicator column
// order and therefore the exact arithmetic.
const std::vector<std::string>& floor_categories();    // ceramic, cement, soil, other
const std::vector<std::string>& roof_categories();     // membrane .. reed_straw, other
const std::vector<std::string>& ceiling_categories();  // yes, no

struct HousingRecord {
  std::string block_id;
  std::string floor;
  std::string roof;
  std::string ceiling;
  double households = 0.0;  // profile multiplicity within the block
};

// First-dimension category coordinates of a correspondence analysis run on
// the weighted profile table. The sign convention puts the precarious
// profile (soil floor, reed/straw roof, no ceiling) on the positive side.
struct McaModel {
  // "variable=token" -> standard coordinate on dimension 1
  std::map<std::string, double> category_coord;
  std::vector<double> singular_values;    // nontrivial dimensions, descending
  std::vector<std::string> dropped_variables;  // constant in the fit data
  std::vector<std::string> warnings;

  // mean of the category coordinates over variables kept in the fit;
  // throws unseen_category when a token never occurred at fit time
  double profile_score(const std::string& floor, const std::string& roof,
                       const std::string& ceiling) const;
};

// Throws parse on unknown tokens, rank_deficient when no nontrivial
// correspondence dimension exists.
McaModel fit_mca(const std::vector<HousingRecord>& records);

struct BlockHousingScore {
  std::string block_id;
  double score = 0.0;
  double households = 0.0;  // scored households
};

struct BlockScoreResult {
  std::vector<BlockHousingScore> blocks;      // sorted by block_id
  std::size_t skipped_households = 0;          // unseen-category profiles
};

// Household-weighted mean profile score per block.
BlockScoreResult score_blocks(const McaModel& model, const std::vector<HousingRecord>& records);

struct AntennaHousingValue {
  std::string antenna_id;
  double value = 0.0;
  double weight = 0.0;   // households apportioned to the cell
  bool empty_cell = false;
};

// Weighted mean of block scores per Voronoi cell. Each block contributes to
// a cell in proportion to households(block) * overlap_share(block, cell).
// Cells intersecting no populated block are flagged empty and carry no
// value.
std::vector<AntennaHousingValue> aggregate_to_antennas(
    const BlockScoreResult& scores, const std::vector<CensusBlock>& blocks,
    const VoronoiDiagram& diagram);

// Ascending-value quartiles (1 = best housing under the orientation above..
// 4 = most precarious) over the antennas whose site lies inside the region,
// boundary included. Ties share the lower quartile. Throws too_few_antennas
// below 4 usable antennas.
std::map<std::string, int> quartile_partition(const std::vector<AntennaHousingValue>& values,
                                              const std::vector<Antenna>& antennas,
                                              const Polygon& region);

}  // namespace chppi
