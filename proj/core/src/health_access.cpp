#include "chppi/health_access.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <queue>

#include "chppi/error.hpp"
#include "chppi/parallel.hpp"
#include "chppi/rng.hpp"

namespace chppi {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// median over a small sample; an unreachable value in the middle pair makes
// the median unreachable
double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  double lo = v[n / 2 - 1];
  double hi = v[n / 2];
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  return hi;
}

}  // namespace

const char* provider_category_name(ProviderCategory c) {
  switch (c) {
    case ProviderCategory::hospital: return "hospital";
    case ProviderCategory::health_center: return "health_center";
    case ProviderCategory::sanitary_post: return "sanitary_post";
  }
  return "unknown";
}

ClassifyResult classify_providers(const std::vector<RawProvider>& raw,
                                  const std::vector<LabelRule>& rules) {
  ClassifyResult out;
  for (const RawProvider& p : raw) {
    std::string label = lower(p.raw_label);
    bool matched = false;
    for (const LabelRule& r : rules) {
      if (label.find(lower(r.needle)) != std::string::npos) {
        out.providers.push_back(HealthProvider{p.id, p.pos, r.category});
        matched = true;
        break;
      }
    }
    if (!matched) out.discarded.push_back(p.id);
  }
  return out;
}

StreetGraph StreetGraph::build(const std::vector<StreetNode>& nodes,
                               const std::vector<StreetEdge>& edges) {
  StreetGraph g;
  std::map<std::string, std::size_t> index;
  for (const StreetNode& n : nodes) {
    if (!index.emplace(n.id, g.ids_.size()).second)
      raise(Errc::validation, "duplicate street node id: " + n.id);
    g.ids_.push_back(n.id);
    g.pos_.push_back(n.pos);
  }
  if (g.ids_.empty()) raise(Errc::validation, "street graph without nodes");

  // collapse parallel edges to the shortest one
  std::map<std::pair<std::size_t, std::size_t>, double> dedup;
  for (const StreetEdge& e : edges) {
    if (!(e.length_m > 0.0))
      raise(Errc::validation, "non-positive street edge length between " + e.node_a + " and " +
                                  e.node_b);
    auto a = index.find(e.node_a);
    auto b = index.find(e.node_b);
    if (a == index.end() || b == index.end())
      raise(Errc::validation, "street edge references unknown node: " + e.node_a + "-" + e.node_b);
    if (a->second == b->second) continue;  // self loops add nothing to routing
    auto key = std::minmax(a->second, b->second);
    auto [it, fresh] = dedup.emplace(std::make_pair(key.first, key.second), e.length_m);
    if (!fresh) it->second = std::min(it->second, e.length_m);
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(g.ids_.size());
  for (const auto& [key, len] : dedup) {
    adj[key.first].emplace_back(key.second, len);
    adj[key.second].emplace_back(key.first, len);
  }
  g.offsets_.assign(g.ids_.size() + 1, 0);
  for (std::size_t i = 0; i < adj.size(); ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    g.offsets_[i + 1] = g.offsets_[i] + adj[i].size();
  }
  g.targets_.reserve(g.offsets_.back());
  g.lengths_.reserve(g.offsets_.back());
  for (const auto& list : adj)
    for (const auto& [to, len] : list) {
      g.targets_.push_back(to);
      g.lengths_.push_back(len);
    }

  std::vector<SpatialIndex::Entry> entries;
  entries.reserve(g.ids_.size());
  for (std::size_t i = 0; i < g.ids_.size(); ++i)
    entries.push_back(SpatialIndex::Entry{g.ids_[i], g.pos_[i]});
  g.node_index_ = SpatialIndex::build(std::move(entries));
  return g;
}

std::size_t StreetGraph::nearest_node(Point p) const {
  auto hits = node_index_.knn(p, 1);
  return hits[0].entry;
}

std::vector<double> StreetGraph::shortest_paths(std::size_t src) const {
  std::vector<double> dist(pos_.size(), kUnreachable);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  dist[src] = 0.0;
  open.emplace(0.0, src);
  while (!open.empty()) {
    auto [d, u] = open.top();
    open.pop();
    if (d > dist[u]) continue;
    for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) {
      std::size_t v = targets_[e];
      double nd = d + lengths_[e];
      if (nd < dist[v]) {
        dist[v] = nd;
        open.emplace(nd, v);
      }
    }
  }
  return dist;
}

double travel_minutes(double snap_in_m, double network_m, double snap_out_m, double speed_kmh) {
  if (!(speed_kmh > 0.0)) raise(Errc::domain_error, "travel speed must be positive");
  double meters = snap_in_m + network_m + snap_out_m;
  return meters * 60.0 / (1000.0 * speed_kmh);
}

std::vector<BlockAccess> block_travel_times(const std::vector<CensusBlock>& blocks,
                                            const std::vector<HealthProvider>& providers,
                                            const StreetGraph& graph, const AccessOptions& opt) {
  if (providers.empty()) raise(Errc::validation, "no classified health providers");
  if (!(opt.speed_kmh > 0.0)) raise(Errc::validation, "travel speed must be positive");
  if (opt.sample_points == 0) raise(Errc::validation, "need at least one sample point");

  struct Candidate {
    std::size_t node;
    double snap_out;
  };
  std::array<std::vector<Candidate>, 3> snap;
  std::array<std::vector<SpatialIndex::Entry>, 3> entries;
  for (const HealthProvider& p : providers) {
    std::size_t c = static_cast<std::size_t>(p.category);
    std::size_t node = graph.nearest_node(p.pos);
    snap[c].push_back(Candidate{node, distance(p.pos, graph.position(node))});
    entries[c].push_back(SpatialIndex::Entry{p.id, p.pos});
  }
  std::array<SpatialIndex, 3> index;
  for (std::size_t c = 0; c < 3; ++c)
    if (!entries[c].empty()) index[c] = SpatialIndex::build(std::move(entries[c]));

  std::vector<BlockAccess> out(blocks.size());
  parallel_for(blocks.size(), opt.threads, [&](std::size_t bi) {
    const CensusBlock& b = blocks[bi];
    BlockAccess row;
    row.block_id = b.id;

    SampledPoints pts = sample_points(b.geom, opt.sample_points, derive_seed(opt.seed, b.id));
    row.degenerate_geom = pts.degenerate;

    std::array<std::vector<double>, 3> per_cat;
    std::vector<double> point_min;
    for (const Point& pt : pts.points) {
      std::size_t src = graph.nearest_node(pt);
      double snap_in = distance(pt, graph.position(src));
      std::vector<double> dist = graph.shortest_paths(src);

      double best_any = kUnreachable;
      for (std::size_t c = 0; c < 3; ++c) {
        if (snap[c].empty()) continue;
        // Euclidean shortlist, then exact network times over it
        auto hits = index[c].knn(pt, std::min(opt.knn_candidates, snap[c].size()));
        double best = kUnreachable;
        for (const auto& h : hits) {
          const Candidate& cand = snap[c][h.entry];
          double network = dist[cand.node];
          if (!std::isfinite(network)) continue;
          best = std::min(best,
                          travel_minutes(snap_in, network, cand.snap_out, opt.speed_kmh));
        }
        per_cat[c].push_back(best);
        best_any = std::min(best_any, best);
      }
      point_min.push_back(best_any);
    }

    for (std::size_t c = 0; c < 3; ++c) {
      if (snap[c].empty()) {
        row.minutes[c] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double sum = 0.0;
      for (double v : per_cat[c]) sum += v;
      row.minutes[c] = sum / static_cast<double>(per_cat[c].size());
    }
    row.delta = median_of(point_min);
    row.unreachable = !std::isfinite(row.delta);
    out[bi] = std::move(row);
  });
  return out;
}

}  // namespace chppi
