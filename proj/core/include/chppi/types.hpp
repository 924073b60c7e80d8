#pragma once

#include <string>
#include <vector>

#include "chppi/geometry.hpp"

namespace chppi {

// Census block with geometry in projected meters. The original geographic
// rings are kept alongside so exported layers can echo coordinates exactly
// as ingested.
struct CensusBlock {
  std::string id;
  Polygon geom;
  Polygon geom_lonlat;
  double population = 0.0;
  double households = 0.0;
  std::string locality_id;
  std::string province_id;
};

struct Antenna {
  std::string id;
  Point pos;         // projected meters
  Point pos_lonlat;  // degrees
};

}  // namespace chppi
