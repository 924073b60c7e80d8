#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "chppi/geometry.hpp"
#include "chppi/types.hpp"

namespace chppi {

// Equal-area map projection between geographic degrees and planar meters.
// The sinusoidal form has an exact analytic inverse, so round trips are
// lossless to floating precision.
struct Projection {
  std::string type = "sinusoidal";
  double central_meridian_deg = 0.0;
  double earth_radius_m = 6371000.0;

  Point project(double lon_deg, double lat_deg) const;
  std::pair<double, double> inverse(Point p) const;  // (lon, lat)

  Polygon project_polygon(const Polygon& lonlat) const;
};

// Census blocks from a FeatureCollection of polygons with block_id,
// population, households, locality_id, province_id properties. Both the
// projected and the original geographic rings are retained.
std::vector<CensusBlock> read_blocks_geojson(const std::string& path, const Projection& proj);

// Single-polygon region file (boundary, endemic region).
Polygon read_region_geojson(const std::string& path, const Projection& proj,
                            Polygon* lonlat_out = nullptr);

// property value variants kept deliberately small
struct PropertyValue {
  enum class Kind { text, number, boolean } kind = Kind::text;
  std::string text;
  double number = 0.0;
  bool boolean = false;

  static PropertyValue str(std::string s);
  static PropertyValue num(double v);
  static PropertyValue flag(bool b);
};

struct Feature {
  Polygon geom_lonlat;
  std::vector<std::pair<std::string, PropertyValue>> properties;  // emitted in order
};

// FeatureCollection writer; coordinates are echoed exactly as held in the
// lon/lat rings (no projection round trip).
void write_geojson(const std::string& path, const std::vector<Feature>& features);

}  // namespace chppi
