#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chppi/geometry.hpp"
#include "chppi/types.hpp"

namespace chppi {

// Affinity toward the endemic region, derived from anonymized call detail
// records: home antennas from night-call counts, per-user affinity seeds
// from the housing quartile of the home antenna, one max-propagation step
// over the call graph, then area-weighted aggregation onto census blocks.

enum class CallDirection { incoming, outgoing };

struct CallRecord {
  std::string originator;
  std::string destinatary;
  CallDirection direction = CallDirection::outgoing;
  int weekday = 0;          // 0 = Monday .. 6 = Sunday
  int seconds_of_day = 0;   // local time
  double duration_s = 0.0;
  std::string tower;        // antenna the record was captured at
};

struct NightWindow {
  int evening_start_hour = 20;  // Mon-Thu from this hour
  int morning_end_hour = 6;     // Tue-Fri before this hour
};

// True for records inside the workday-night window used for home detection.
bool is_night_call(int weekday, int seconds_of_day, const NightWindow& w = {});

struct HomeInfo {
  std::string antenna;
  std::int64_t night_calls = 0;  // at the winning antenna
};

// Home antenna per user: the antenna collecting the most night records for
// that user. The user of a record is the originator for outgoing records
// and the destinatary for incoming ones. Count ties are broken by a draw
// seeded from (seed, user id), so results do not depend on thread count or
// record order. Users with no night calls get no home.
std::map<std::string, HomeInfo> detect_home_antennas(const std::vector<CallRecord>& records,
                                                     std::uint64_t seed,
                                                     const NightWindow& window = {},
                                                     int threads = 1);

struct SocialGraph {
  // undirected, no self loops; key is the (min,max) id pair
  std::map<std::pair<std::string, std::string>, std::int64_t> edges;
  std::map<std::string, std::vector<std::string>> adjacency;  // sorted neighbor lists
};

// Edges between users with at least min_calls calls in either direction
// combined. Self calls are ignored.
SocialGraph build_social_graph(const std::vector<CallRecord>& records,
                               std::int64_t min_calls = 1);

// Seed affinity per antenna: 0 outside the endemic region, the housing
// quartile (1..4) inside it. Throws missing_quartile when an in-region
// antenna has no quartile.
std::map<std::string, int> assign_seed_affinity(const std::vector<Antenna>& antennas,
                                                const Polygon& endemic_region,
                                                const std::map<std::string, int>& quartile_of);

struct PropagationResult {
  std::map<std::string, int> affinity;   // users with a home only
  std::size_t users_without_home = 0;    // graph nodes skipped
};

// One propagation step: each homed user takes the maximum seed among its
// homed neighbors; with include_self the user's own seed competes too,
// without it the own seed is only the fallback when no neighbor is
// scoreable. Users absent from the graph keep their own seed.
PropagationResult propagate_affinity(const SocialGraph& graph,
                                     const std::map<std::string, HomeInfo>& homes,
                                     const std::map<std::string, int>& seed_of_antenna,
                                     bool include_self = true);

struct AntennaTuple {
  std::string antenna_id;
  std::array<std::int64_t, 5> counts{};  // homed users by affinity level 0..4
};

// Distribution of user affinity per home antenna; every antenna in the list
// appears, possibly with all-zero counts.
std::vector<AntennaTuple> tally_antenna_tuples(const std::map<std::string, HomeInfo>& homes,
                                               const std::map<std::string, int>& affinity,
                                               const std::vector<Antenna>& antennas);

// Scalar affinity of one antenna: expected level / 4, in [0,1].
double antenna_affinity(const AntennaTuple& t);

struct BlockAffinity {
  std::string block_id;
  double ai = 0.0;
  bool uncovered = false;  // cell overlap misses part of the block footprint
};

// Area-weighted mean of antenna affinities over each block footprint.
std::vector<BlockAffinity> block_affinity_index(const std::vector<AntennaTuple>& tuples,
                                                const VoronoiDiagram& diagram,
                                                const std::vector<CensusBlock>& blocks);

}  // namespace chppi
