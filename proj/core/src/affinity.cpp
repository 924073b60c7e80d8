#include "chppi/affinity.hpp"

#include <algorithm>
#include <cmath>

#include "chppi/error.hpp"
#include "chppi/parallel.hpp"
#include "chppi/rng.hpp"

namespace chppi {

bool is_night_call(int weekday, int seconds_of_day, const NightWindow& w) {
  const int hour = seconds_of_day / 3600;
  // evenings of Monday..Thursday plus the following early mornings
  if (weekday >= 0 && weekday <= 3 && hour >= w.evening_start_hour) return true;
  if (weekday >= 1 && weekday <= 4 && hour < w.morning_end_hour) return true;
  return false;
}

std::map<std::string, HomeInfo> detect_home_antennas(const std::vector<CallRecord>& records,
                                                     std::uint64_t seed,
                                                     const NightWindow& window, int threads) {
  using Counts = std::map<std::string, std::map<std::string, std::int64_t>>;

  int slices = std::max(1, threads);
  std::vector<Counts> partial(static_cast<std::size_t>(slices));
  std::size_t chunk = (records.size() + static_cast<std::size_t>(slices) - 1) /
                      static_cast<std::size_t>(slices);
  parallel_for(static_cast<std::size_t>(slices), threads, [&](std::size_t s) {
    std::size_t lo = s * chunk;
    std::size_t hi = std::min(records.size(), lo + chunk);
    Counts& c = partial[s];
    for (std::size_t i = lo; i < hi; ++i) {
      const CallRecord& r = records[i];
      if (!is_night_call(r.weekday, r.seconds_of_day, window)) continue;
      // one presence event per record, on the side the record belongs to
      const std::string& user =
          r.direction == CallDirection::outgoing ? r.originator : r.destinatary;
      c[user][r.tower] += 1;
    }
  });

  Counts total;
  for (const Counts& c : partial)
    for (const auto& [user, per_antenna] : c)
      for (const auto& [antenna, n] : per_antenna) total[user][antenna] += n;

  std::map<std::string, HomeInfo> homes;
  for (const auto& [user, per_antenna] : total) {
    std::int64_t best = 0;
    for (const auto& [antenna, n] : per_antenna) best = std::max(best, n);
    std::vector<std::string> tied;
    for (const auto& [antenna, n] : per_antenna)
      if (n == best) tied.push_back(antenna);
    // tied contenders are resolved by a per-user draw; the map already
    // yields them in ascending id order
    std::size_t pick = 0;
    if (tied.size() > 1) {
      Rng rng(derive_seed(seed, user));
      pick = static_cast<std::size_t>(rng.below(tied.size()));
    }
    homes[user] = HomeInfo{tied[pick], best};
  }
  return homes;
}

SocialGraph build_social_graph(const std::vector<CallRecord>& records, std::int64_t min_calls) {
  std::map<std::pair<std::string, std::string>, std::int64_t> raw;
  for (const CallRecord& r : records) {
    if (r.originator == r.destinatary) continue;
    auto key = r.originator < r.destinatary ? std::make_pair(r.originator, r.destinatary)
                                            : std::make_pair(r.destinatary, r.originator);
    raw[key] += 1;
  }
  SocialGraph g;
  for (const auto& [key, n] : raw) {
    if (n < min_calls) continue;
    g.edges.emplace(key, n);
    g.adjacency[key.first].push_back(key.second);
    g.adjacency[key.second].push_back(key.first);
  }
  for (auto& [user, nbrs] : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

std::map<std::string, int> assign_seed_affinity(const std::vector<Antenna>& antennas,
                                                const Polygon& endemic_region,
                                                const std::map<std::string, int>& quartile_of) {
  std::map<std::string, int> seeds;
  for (const Antenna& a : antennas) {
    if (contains(endemic_region, a.pos)) {
      auto it = quartile_of.find(a.id);
      if (it == quartile_of.end())
        raise(Errc::missing_quartile, "antenna inside endemic region lacks quartile: " + a.id);
      if (it->second < 1 || it->second > 4)
        raise(Errc::validation, "quartile out of range for antenna " + a.id);
      seeds[a.id] = it->second;
    } else {
      seeds[a.id] = 0;
    }
  }
  return seeds;
}

PropagationResult propagate_affinity(const SocialGraph& graph,
                                     const std::map<std::string, HomeInfo>& homes,
                                     const std::map<std::string, int>& seed_of_antenna,
                                     bool include_self) {
  auto seed_of_user = [&](const std::string& user) -> int {
    const HomeInfo& h = homes.at(user);
    auto it = seed_of_antenna.find(h.antenna);
    if (it == seed_of_antenna.end())
      raise(Errc::validation, "home antenna without seed affinity: " + h.antenna);
    return it->second;
  };

  PropagationResult res;
  for (const auto& [user, nbrs] : graph.adjacency)
    if (!homes.count(user)) ++res.users_without_home;

  for (const auto& [user, home] : homes) {
    int own = seed_of_user(user);
    int best = -1;
    auto it = graph.adjacency.find(user);
    if (it != graph.adjacency.end()) {
      for (const std::string& v : it->second) {
        if (!homes.count(v)) continue;  // neighbor contributes only when scoreable
        best = std::max(best, seed_of_user(v));
      }
    }
    int value;
    if (include_self) {
      value = std::max(own, best);
    } else {
      value = best >= 0 ? best : own;  // own seed only as the isolated fallback
    }
    res.affinity[user] = value;
  }
  return res;
}

std::vector<AntennaTuple> tally_antenna_tuples(const std::map<std::string, HomeInfo>& homes,
                                               const std::map<std::string, int>& affinity,
                                               const std::vector<Antenna>& antennas) {
  std::map<std::string, AntennaTuple> acc;
  for (const Antenna& a : antennas) acc[a.id] = AntennaTuple{a.id, {}};
  for (const auto& [user, home] : homes) {
    auto sit = affinity.find(user);
    if (sit == affinity.end()) continue;
    auto it = acc.find(home.antenna);
    if (it == acc.end())
      raise(Errc::validation, "home antenna not in antenna registry: " + home.antenna);
    if (sit->second < 0 || sit->second > 4)
      raise(Errc::validation, "affinity level out of range for user " + user);
    it->second.counts[static_cast<std::size_t>(sit->second)] += 1;
  }
  std::vector<AntennaTuple> out;
  out.reserve(acc.size());
  for (auto& [id, t] : acc) out.push_back(std::move(t));
  return out;
}

double antenna_affinity(const AntennaTuple& t) {
  std::int64_t total = 0;
  std::int64_t weighted = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    total += t.counts[k];
    weighted += static_cast<std::int64_t>(k) * t.counts[k];
  }
  if (total == 0) return 0.0;
  return static_cast<double>(weighted) / (4.0 * static_cast<double>(total));
}

std::vector<BlockAffinity> block_affinity_index(const std::vector<AntennaTuple>& tuples,
                                                const VoronoiDiagram& diagram,
                                                const std::vector<CensusBlock>& blocks) {
  std::vector<double> alpha(diagram.ids.size(), 0.0);
  for (const AntennaTuple& t : tuples) {
    auto it = diagram.index.find(t.antenna_id);
    if (it == diagram.index.end())
      raise(Errc::validation, "tuple for antenna outside the diagram: " + t.antenna_id);
    alpha[it->second] = antenna_affinity(t);
  }

  const std::size_t n = diagram.ids.size();
  std::vector<Bbox> cell_boxes(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!diagram.cells[i].exterior.empty()) cell_boxes[i] = bbox(diagram.cells[i]);

  std::vector<BlockAffinity> out;
  out.reserve(blocks.size());
  for (const CensusBlock& b : blocks) {
    BlockAffinity row;
    row.block_id = b.id;
    double block_area = area(b.geom);
    if (block_area <= 0.0) {
      // measure-zero footprint: inherit the affinity of the cell holding
      // the centroid
      Point c = centroid(b.geom);
      row.uncovered = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (diagram.cells[i].exterior.empty()) continue;
        if (contains(diagram.cells[i], c)) {
          row.ai = alpha[i];
          row.uncovered = false;
          break;
        }
      }
    } else {
      Bbox bb = bbox(b.geom);
      double covered = 0.0;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (diagram.cells[i].exterior.empty() || !bb.overlaps(cell_boxes[i])) continue;
        double overlap = intersection_area(b.geom, diagram.cells[i]);
        if (overlap <= 0.0) continue;
        double share = overlap / block_area;
        // slivers this thin are clipping noise, not coverage
        if (share < 1e-9) continue;
        covered += share;
        acc += alpha[i] * share;
      }
      row.ai = std::clamp(acc, 0.0, 1.0);
      row.uncovered = covered < 1.0 - 1e-6;
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace chppi
