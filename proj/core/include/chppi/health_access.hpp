#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chppi/geometry.hpp"
#include "chppi/spatial_index.hpp"
#include "chppi/types.hpp"

namespace chppi {

// Travel time from census blocks to the nearest health providers over the
// street network, walking speed, one Dijkstra per sampled block point.

enum class ProviderCategory { hospital = 0, health_center = 1, sanitary_post = 2 };

const char* provider_category_name(ProviderCategory c);

struct RawProvider {
  std::string id;
  Point pos;
  std::string raw_label;
};

struct HealthProvider {
  std::string id;
  Point pos;
  ProviderCategory category;
};

struct LabelRule {
  std::string needle;  // matched case-insensitively as a substring
  ProviderCategory category;
};

struct ClassifyResult {
  std::vector<HealthProvider> providers;
  std::vector<std::string> discarded;  // provider ids with no matching rule
};

// First matching rule wins; providers matching none are discarded and
// reported.
ClassifyResult classify_providers(const std::vector<RawProvider>& raw,
                                  const std::vector<LabelRule>& rules);

struct StreetEdge {
  std::string node_a;
  std::string node_b;
  double length_m = 0.0;
};

struct StreetNode {
  std::string id;
  Point pos;
};

class StreetGraph {
 public:
  // Parallel edges collapse to the shortest; non-positive lengths and edges
  // to unknown nodes are rejected (validation).
  static StreetGraph build(const std::vector<StreetNode>& nodes,
                           const std::vector<StreetEdge>& edges);

  std::size_t node_count() const { return pos_.size(); }
  const Point& position(std::size_t i) const { return pos_[i]; }
  const std::string& node_id(std::size_t i) const { return ids_[i]; }

  // nearest node by Euclidean distance, ties by node id
  std::size_t nearest_node(Point p) const;

  // shortest path lengths in meters from src to every node; unreachable
  // nodes carry +infinity
  std::vector<double> shortest_paths(std::size_t src) const;

 private:
  std::vector<std::string> ids_;
  std::vector<Point> pos_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> targets_;
  std::vector<double> lengths_;
  SpatialIndex node_index_;
};

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Door-to-door minutes: straight-line snap to the network on both ends plus
// the network path, all at walking speed.
double travel_minutes(double snap_in_m, double network_m, double snap_out_m, double speed_kmh);

struct AccessOptions {
  double speed_kmh = 5.0;
  std::size_t knn_candidates = 10;
  std::size_t sample_points = 5;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct BlockAccess {
  std::string block_id;
  // mean minutes to the nearest provider per category over the sampled
  // points; +inf when unreachable, NaN when the category has no provider
  std::array<double, 3> minutes{};
  // robust typical time: median over points of the per-point minimum across
  // categories
  double delta = 0.0;
  bool unreachable = false;      // delta is not finite
  bool degenerate_geom = false;  // centroid stood in for interior samples
};

// Travel times per block. Deterministic in (inputs, seed) and independent
// of thread count: per-block sampling is seeded by block id.
std::vector<BlockAccess> block_travel_times(const std::vector<CensusBlock>& blocks,
                                            const std::vector<HealthProvider>& providers,
                                            const StreetGraph& graph,
                                            const AccessOptions& opt = {});

}  // namespace chppi
