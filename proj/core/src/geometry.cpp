#include "chppi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chppi/error.hpp"
#include "chppi/rng.hpp"

namespace chppi {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// consecutive-duplicate removal on an open ring
Ring dedup_open(const Ring& in) {
  Ring out;
  out.reserve(in.size());
  for (const Point& p : in) {
    if (out.empty() || !(p == out.back())) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

Ring close_ring(Ring open) {
  open.push_back(open.front());
  return open;
}

bool on_segment(Point p, Point a, Point b) {
  double abx = b.x - a.x, aby = b.y - a.y;
  double apx = p.x - a.x, apy = p.y - a.y;
  double len = std::hypot(abx, aby);
  double cr = abx * apy - aby * apx;
  if (std::abs(cr) > 1e-9 * std::max(1.0, len) * std::max(1.0, len)) return false;
  double dot = apx * abx + apy * aby;
  return dot >= -1e-9 * std::max(1.0, len) && dot <= len * len + 1e-9 * std::max(1.0, len);
}

int winding_number(const Ring& ring, Point q) {
  int wn = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point& a = ring[i];
    const Point& b = ring[i + 1];
    if (a.y <= q.y) {
      if (b.y > q.y && cross(a, b, q) > 0) ++wn;
    } else {
      if (b.y <= q.y && cross(a, b, q) < 0) --wn;
    }
  }
  return wn;
}

// strict interior crossing of segments ab and cd; shared endpoints and
// collinear overlaps do not count
bool proper_crossing(Point a, Point b, Point c, Point d, double tol) {
  double d1 = cross(c, d, a);
  double d2 = cross(c, d, b);
  double d3 = cross(a, b, c);
  double d4 = cross(a, b, d);
  if (std::abs(d1) <= tol || std::abs(d2) <= tol || std::abs(d3) <= tol || std::abs(d4) <= tol)
    return false;
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

void check_simple(const Ring& closed, const char* what) {
  double scale = 0;
  for (const Point& p : closed) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  double tol = 1e-9 * std::max(1.0, scale) * std::max(1.0, scale);
  std::size_t n = closed.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // skip adjacent edges (including the wrap-around pair)
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (proper_crossing(closed[i], closed[i + 1], closed[j], closed[j + 1], tol))
        raise(Errc::invalid_geometry, std::string(what) + ": ring self-intersects");
    }
  }
}

Ring normalize_ring(Ring r, bool want_ccw, const char* what) {
  Ring open = dedup_open(r);
  if (open.size() < 3)
    raise(Errc::invalid_geometry, std::string(what) + ": ring needs 3 distinct vertices");
  Ring closed = close_ring(std::move(open));
  double s = signed_area(closed);
  if ((want_ccw && s < 0) || (!want_ccw && s > 0)) std::reverse(closed.begin(), closed.end());
  check_simple(closed, what);
  return closed;
}

// lexicographic polygon comparison used to pick a canonical operand order
int compare_polygons(const Polygon& a, const Polygon& b) {
  auto cmp_ring = [](const Ring& x, const Ring& y) -> int {
    if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].x != y[i].x) return x[i].x < y[i].x ? -1 : 1;
      if (x[i].y != y[i].y) return x[i].y < y[i].y ? -1 : 1;
    }
    return 0;
  };
  if (int c = cmp_ring(a.exterior, b.exterior)) return c;
  if (a.holes.size() != b.holes.size()) return a.holes.size() < b.holes.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.holes.size(); ++i)
    if (int c = cmp_ring(a.holes[i], b.holes[i])) return c;
  return 0;
}

Ring as_ccw(const Ring& r) {
  if (signed_area(r) < 0) {
    Ring rev(r.rbegin(), r.rend());
    return rev;
  }
  return r;
}

// Overlap area of two simple rings. The first ring is fanned into signed
// triangles; the second is clipped against each triangle. The signed sum of
// the clipped areas equals the overlap because the triangle windings add to
// one inside the first ring and zero outside.
double ring_overlap(const Ring& r1, const Ring& r2) {
  Ring a = as_ccw(r1);
  Ring b = as_ccw(r2);
  if (a.size() < 4 || b.size() < 4) return 0.0;
  double total = 0.0;
  const Point& v0 = a[0];
  for (std::size_t i = 1; i + 2 < a.size(); ++i) {
    const Point& v1 = a[i];
    const Point& v2 = a[i + 1];
    double tri2 = cross(v0, v1, v2);
    if (tri2 == 0.0) continue;
    double sign = tri2 > 0 ? 1.0 : -1.0;
    Point p0 = v0, p1 = v1, p2 = v2;
    if (sign < 0) std::swap(p1, p2);
    Ring clipped = b;
    const Point tri[3] = {p0, p1, p2};
    for (int e = 0; e < 3 && clipped.size() >= 4; ++e) {
      Point s = tri[e];
      Point t = tri[(e + 1) % 3];
      // outward normal of a CCW edge; keep the left side
      Point n{t.y - s.y, -(t.x - s.x)};
      clipped = clip_halfplane(clipped, s, n, 0.0);
    }
    if (clipped.size() >= 4) total += sign * signed_area(clipped);
  }
  return total;
}

}  // namespace

double signed_area(const Ring& r) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    s += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
  return 0.5 * s;
}

double area(const Polygon& p) {
  double a = std::abs(signed_area(p.exterior));
  for (const Ring& h : p.holes) a -= std::abs(signed_area(h));
  return std::max(a, 0.0);
}

Point centroid(const Polygon& p) {
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  auto accumulate = [&](const Ring& r) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      double cr = r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
      a2 += cr;
      cx += (r[i].x + r[i + 1].x) * cr;
      cy += (r[i].y + r[i + 1].y) * cr;
    }
  };
  accumulate(p.exterior);
  for (const Ring& h : p.holes) accumulate(h);
  if (std::abs(a2) > 1e-12) return {cx / (3.0 * a2), cy / (3.0 * a2)};
  // area ~0: fall back to the vertex mean
  double sx = 0, sy = 0;
  std::size_t n = p.exterior.size() > 1 ? p.exterior.size() - 1 : p.exterior.size();
  if (n == 0) return {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    sx += p.exterior[i].x;
    sy += p.exterior[i].y;
  }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

Bbox bbox(const Polygon& p) {
  Bbox b{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
         std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Point& q : p.exterior) {
    b.min_x = std::min(b.min_x, q.x);
    b.min_y = std::min(b.min_y, q.y);
    b.max_x = std::max(b.max_x, q.x);
    b.max_y = std::max(b.max_y, q.y);
  }
  return b;
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Polygon make_polygon(Ring exterior, std::vector<Ring> holes) {
  Polygon p;
  p.exterior = normalize_ring(std::move(exterior), true, "exterior");
  for (Ring& h : holes) p.holes.push_back(normalize_ring(std::move(h), false, "hole"));
  return p;
}

bool contains(const Polygon& p, Point q) {
  auto boundary = [&](const Ring& r) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
      if (on_segment(q, r[i], r[i + 1])) return true;
    return false;
  };
  if (boundary(p.exterior)) return true;
  for (const Ring& h : p.holes)
    if (boundary(h)) return true;
  if (winding_number(p.exterior, q) == 0) return false;
  for (const Ring& h : p.holes)
    if (winding_number(h, q) != 0) return false;
  return true;
}

Ring clip_halfplane(const Ring& ring, Point origin, Point normal, double offset) {
  if (ring.size() < 4) return {};
  auto side = [&](const Point& p) {
    return (p.x - origin.x) * normal.x + (p.y - origin.y) * normal.y - offset;
  };
  Ring out;
  out.reserve(ring.size() + 2);
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point& cur = ring[i];
    const Point& nxt = ring[i + 1];
    double sc = side(cur);
    double sn = side(nxt);
    bool in_c = sc <= 0.0;
    bool in_n = sn <= 0.0;
    if (in_c) out.push_back(cur);
    if (in_c != in_n) {
      double t = sc / (sc - sn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  Ring open = dedup_open(out);
  if (open.size() < 3) return {};
  return close_ring(std::move(open));
}

double intersection_area(const Polygon& a, const Polygon& b) {
  if (a.exterior.size() < 4 || b.exterior.size() < 4) return 0.0;
  // merely touching boxes bound a measure-zero overlap
  Bbox ba = bbox(a), bb = bbox(b);
  if (!(ba.min_x < bb.max_x && bb.min_x < ba.max_x && ba.min_y < bb.max_y &&
        bb.min_y < ba.max_y))
    return 0.0;
  // canonical operand order makes the result bit-identical under swap
  const Polygon* first = &a;
  const Polygon* second = &b;
  if (compare_polygons(a, b) > 0) std::swap(first, second);
  double total = ring_overlap(first->exterior, second->exterior);
  for (const Ring& h : first->holes) total -= ring_overlap(h, second->exterior);
  for (const Ring& g : second->holes) total -= ring_overlap(first->exterior, g);
  for (const Ring& h : first->holes)
    for (const Ring& g : second->holes) total += ring_overlap(h, g);
  return std::max(total, 0.0);
}

SampledPoints sample_points(const Polygon& p, std::size_t n, std::uint64_t seed) {
  SampledPoints result;
  if (n == 0) return result;
  Bbox bb = bbox(p);
  double w = bb.max_x - bb.min_x;
  double h = bb.max_y - bb.min_y;
  double a = area(p);
  auto degenerate = [&]() {
    Point c = centroid(p);
    result.points.assign(n, c);
    result.degenerate = true;
    return result;
  };
  if (w <= 0 || h <= 0 || a <= 1e-9 * std::max(w * h, 1.0)) return degenerate();
  Rng rng(seed);
  std::size_t cap = 10000 + 2000 * n;
  result.points.reserve(n);
  for (std::size_t attempt = 0; attempt < cap && result.points.size() < n; ++attempt) {
    Point q{bb.min_x + w * rng.uniform(), bb.min_y + h * rng.uniform()};
    if (contains(p, q)) result.points.push_back(q);
  }
  if (result.points.size() < n) return degenerate();
  return result;
}

const Polygon& VoronoiDiagram::cell_of(const std::string& id) const {
  auto it = index.find(id);
  if (it == index.end()) raise(Errc::domain_error, "unknown voronoi site id: " + id);
  return cells[it->second];
}

VoronoiDiagram voronoi_partition(const std::vector<std::pair<std::string, Point>>& sites,
                                 const Polygon& clip) {
  if (sites.empty()) raise(Errc::empty_sites, "voronoi_partition needs at least one site");
  if (!clip.holes.empty())
    raise(Errc::invalid_geometry, "voronoi clip polygon must be hole-free");
  Polygon boundary = make_polygon(clip.exterior);

  VoronoiDiagram d;
  d.clip = boundary;
  d.ids.reserve(sites.size());
  d.sites.reserve(sites.size());
  for (const auto& [id, p] : sites) {
    if (!d.index.emplace(id, d.ids.size()).second)
      raise(Errc::duplicate_site, "duplicate site id: " + id);
    d.ids.push_back(id);
    d.sites.push_back(p);
  }
  // sites must be separated in space; sub-micrometer gaps are treated as
  // duplicates because their bisectors are numerically meaningless
  {
    std::vector<std::size_t> order(sites.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      if (d.sites[i].x != d.sites[j].x) return d.sites[i].x < d.sites[j].x;
      return d.sites[i].y < d.sites[j].y;
    });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      Point a = d.sites[order[k]];
      Point b = d.sites[order[k + 1]];
      if (distance(a, b) < 1e-6)
        raise(Errc::duplicate_site,
              "coincident sites: " + d.ids[order[k]] + " and " + d.ids[order[k + 1]]);
    }
  }

  d.cells.resize(sites.size());
  std::vector<std::pair<double, std::size_t>> by_dist;
  for (std::size_t i = 0; i < d.sites.size(); ++i) {
    Point a = d.sites[i];
    by_dist.clear();
    for (std::size_t j = 0; j < d.sites.size(); ++j) {
      if (j == i) continue;
      double dx = d.sites[j].x - a.x;
      double dy = d.sites[j].y - a.y;
      by_dist.emplace_back(dx * dx + dy * dy, j);
    }
    std::sort(by_dist.begin(), by_dist.end());

    Ring cell = boundary.exterior;
    for (const auto& [d2, j] : by_dist) {
      if (cell.size() < 4) break;
      double r = 0.0;
      for (std::size_t v = 0; v + 1 < cell.size(); ++v)
        r = std::max(r, distance(cell[v], a));
      // a site at distance >= 2r cannot cut the cell, and the remaining
      // sites are farther still
      if (d2 >= 4.0 * r * r) break;
      Point b = d.sites[j];
      Point mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
      Point n{b.x - a.x, b.y - a.y};
      cell = clip_halfplane(cell, mid, n, 0.0);
    }
    if (cell.size() >= 4) {
      d.cells[i] = make_polygon(cell);
    }
  }
  return d;
}

}  // namespace chppi
