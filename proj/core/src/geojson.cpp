#include "chppi/geojson.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "chppi/csv.hpp"
#include "chppi/error.hpp"

namespace chppi {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kDegToRad = M_PI / 180.0;

Polygon polygon_from_coords(const ordered_json& coords, const std::string& what) {
  if (!coords.is_array() || coords.empty())
    raise(Errc::parse, what + ": polygon without rings");
  auto ring_of = [&](const ordered_json& jring) {
    Ring r;
    for (const auto& pt : jring) {
      if (!pt.is_array() || pt.size() < 2) raise(Errc::parse, what + ": bad coordinate");
      r.push_back(Point{pt[0].get<double>(), pt[1].get<double>()});
    }
    return r;
  };
  Ring exterior = ring_of(coords[0]);
  std::vector<Ring> holes;
  for (std::size_t i = 1; i < coords.size(); ++i) holes.push_back(ring_of(coords[i]));
  return Polygon{std::move(exterior), std::move(holes)};
}

ordered_json coords_of(const Polygon& p) {
  ordered_json rings = ordered_json::array();
  auto emit = [&](const Ring& r) {
    ordered_json jr = ordered_json::array();
    for (const Point& q : r) jr.push_back(ordered_json::array({q.x, q.y}));
    rings.push_back(std::move(jr));
  };
  emit(p.exterior);
  for (const Ring& h : p.holes) emit(h);
  return rings;
}

}  // namespace

Point Projection::project(double lon_deg, double lat_deg) const {
  if (type != "sinusoidal") raise(Errc::validation, "unsupported projection type: " + type);
  double lat = lat_deg * kDegToRad;
  double dlon = (lon_deg - central_meridian_deg) * kDegToRad;
  return Point{earth_radius_m * dlon * std::cos(lat), earth_radius_m * lat};
}

std::pair<double, double> Projection::inverse(Point p) const {
  if (type != "sinusoidal") raise(Errc::validation, "unsupported projection type: " + type);
  double lat = p.y / earth_radius_m;
  double coslat = std::cos(lat);
  double dlon = coslat != 0.0 ? p.x / (earth_radius_m * coslat) : 0.0;
  return {central_meridian_deg + dlon / kDegToRad, lat / kDegToRad};
}

Polygon Projection::project_polygon(const Polygon& lonlat) const {
  auto project_ring = [&](const Ring& r) {
    Ring out;
    out.reserve(r.size());
    for (const Point& q : r) out.push_back(project(q.x, q.y));
    return out;
  };
  Ring exterior = project_ring(lonlat.exterior);
  std::vector<Ring> holes;
  for (const Ring& h : lonlat.holes) holes.push_back(project_ring(h));
  return make_polygon(std::move(exterior), std::move(holes));
}

std::vector<CensusBlock> read_blocks_geojson(const std::string& path, const Projection& proj) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse, path + ": " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection")
    raise(Errc::parse, path + ": not a FeatureCollection");

  std::vector<CensusBlock> blocks;
  for (const auto& f : doc["features"]) {
    const auto& geom = f.at("geometry");
    if (geom.value("type", "") != "Polygon")
      raise(Errc::parse, path + ": only Polygon geometries are supported");
    const auto& props = f.at("properties");
    CensusBlock b;
    b.id = props.at("block_id").get<std::string>();
    b.population = props.value("population", 0.0);
    b.households = props.value("households", 0.0);
    b.locality_id = props.value("locality_id", std::string());
    b.province_id = props.value("province_id", std::string());
    Polygon lonlat = polygon_from_coords(geom.at("coordinates"), path + " block " + b.id);
    b.geom = proj.project_polygon(lonlat);
    // keep the source rings untouched for later emission
    b.geom_lonlat = std::move(lonlat);
    blocks.push_back(std::move(b));
  }
  if (blocks.empty()) raise(Errc::parse, path + ": no block features");
  return blocks;
}

Polygon read_region_geojson(const std::string& path, const Projection& proj,
                            Polygon* lonlat_out) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse, path + ": " + e.what());
  }
  ordered_json geom;
  std::string type = doc.value("type", "");
  if (type == "FeatureCollection") {
    const auto& features = doc.at("features");
    if (features.empty()) raise(Errc::parse, path + ": empty FeatureCollection");
    geom = features[0].at("geometry");
  } else if (type == "Feature") {
    geom = doc.at("geometry");
  } else {
    geom = doc;
  }
  if (geom.value("type", "") != "Polygon")
    raise(Errc::parse, path + ": expected a Polygon geometry");
  Polygon lonlat = polygon_from_coords(geom.at("coordinates"), path);
  if (lonlat_out) *lonlat_out = lonlat;
  return proj.project_polygon(lonlat);
}

PropertyValue PropertyValue::str(std::string s) {
  PropertyValue v;
  v.kind = Kind::text;
  v.text = std::move(s);
  return v;
}

PropertyValue PropertyValue::num(double d) {
  PropertyValue v;
  v.kind = Kind::number;
  v.number = d;
  return v;
}

PropertyValue PropertyValue::flag(bool b) {
  PropertyValue v;
  v.kind = Kind::boolean;
  v.boolean = b;
  return v;
}

void write_geojson(const std::string& path, const std::vector<Feature>& features) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  ordered_json arr = ordered_json::array();
  for (const Feature& f : features) {
    ordered_json jf;
    jf["type"] = "Feature";
    ordered_json props;
    for (const auto& [key, val] : f.properties) {
      switch (val.kind) {
        case PropertyValue::Kind::text: props[key] = val.text; break;
        case PropertyValue::Kind::number:
          if (std::isfinite(val.number))
            props[key] = val.number;
          else
            props[key] = nullptr;
          break;
        case PropertyValue::Kind::boolean: props[key] = val.boolean; break;
      }
    }
    jf["properties"] = std::move(props);
    jf["geometry"] = {{"type", "Polygon"}, {"coordinates", coords_of(f.geom_lonlat)}};
    arr.push_back(std::move(jf));
  }
  doc["features"] = std::move(arr);
  write_file(path, doc.dump(1) + "\n");
}

}  // namespace chppi
