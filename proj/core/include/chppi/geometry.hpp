#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace chppi {

// Planar geometry on projected meter coordinates. Polygons are simple rings
// (first vertex repeated last), exterior counter-clockwise, holes clockwise
// after normalization.

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

using Ring = std::vector<Point>;

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
};

struct Bbox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool overlaps(const Bbox& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
};

// Shoelace sum; positive for counter-clockwise rings.
double signed_area(const Ring& r);

double area(const Polygon& p);
Point centroid(const Polygon& p);
Bbox bbox(const Polygon& p);
double distance(Point a, Point b);

// Validates and normalizes: rings closed with >= 3 distinct vertices,
// exterior oriented CCW and holes CW, no proper (crossing) self
// intersection. Touching or collinear-overlapping edges are tolerated;
// clipping produces them routinely. Throws invalid_geometry.
Polygon make_polygon(Ring exterior, std::vector<Ring> holes = {});

// Winding-number containment; boundary points count as inside.
bool contains(const Polygon& p, Point q);

// Area of the overlap of two simple polygons (holes honored through
// inclusion-exclusion). Symmetric in its arguments bit for bit: the pair is
// put in a canonical order before any arithmetic.
double intersection_area(const Polygon& a, const Polygon& b);

// Clip a ring by the half-plane {q : dot(q - p, n) <= c}; used by the
// Voronoi construction and exposed for tests.
Ring clip_halfplane(const Ring& ring, Point origin, Point normal, double offset);

struct SampledPoints {
  std::vector<Point> points;
  // set when the polygon area is ~0 and the centroid stands in for samples
  bool degenerate = false;
};

// n interior points by seeded rejection sampling in the bbox. Deterministic
// in (polygon, n, seed).
SampledPoints sample_points(const Polygon& p, std::size_t n, std::uint64_t seed);

struct VoronoiDiagram {
  std::vector<std::string> ids;     // input order
  std::vector<Point> sites;
  std::vector<Polygon> cells;       // same order as ids
  Polygon clip;
  std::map<std::string, std::size_t> index;

  const Polygon& cell_of(const std::string& id) const;
};

// Partition of the clip polygon into nearest-site cells. Each cell is the
// intersection of the clip region with the half-planes toward every other
// site. Throws duplicate_site / empty_sites / invalid_geometry.
VoronoiDiagram voronoi_partition(const std::vector<std::pair<std::string, Point>>& sites,
                                 const Polygon& clip);

}  // namespace chppi
