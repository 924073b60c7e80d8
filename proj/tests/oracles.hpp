#pragma once

// Brute-force reference implementations. Everything here favors obviousness
// over speed; the library is checked against these, never the other way
// around.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chppi/geometry.hpp"
#include "chppi/housing.hpp"
#include "chppi/pipeline.hpp"
#include "chppi/rng.hpp"

namespace oracle {

// --- exhaustive k nearest neighbors ---------------------------------------

struct NamedPoint {
  std::string id;
  chppi::Point pos;
};

inline std::vector<std::string> knn_ids(const std::vector<NamedPoint>& pts, chppi::Point q,
                                        std::size_t k) {
  std::vector<std::pair<double, std::string>> d;
  for (const NamedPoint& p : pts) d.emplace_back(chppi::distance(p.pos, q), p.id);
  std::sort(d.begin(), d.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < d.size() && i < k; ++i) out.push_back(d[i].second);
  return out;
}

// --- per-node neighborhood max --------------------------------------------

// adjacency over homed users only; seed_of holds each homed user's own seed
inline std::map<std::string, int> propagate(
    const std::map<std::string, std::set<std::string>>& adjacency,
    const std::map<std::string, int>& seed_of, bool include_self) {
  std::map<std::string, int> out;
  for (const auto& [user, own] : seed_of) {
    int best = -1;
    auto it = adjacency.find(user);
    if (it != adjacency.end())
      for (const std::string& v : it->second) {
        auto sit = seed_of.find(v);
        if (sit != seed_of.end()) best = std::max(best, sit->second);
      }
    if (include_self)
      out[user] = std::max(own, best);
    else
      out[user] = best >= 0 ? best : own;
  }
  return out;
}

// --- Bellman-Ford over an undirected edge list ------------------------------

struct Edge {
  std::size_t a = 0, b = 0;
  double w = 0.0;
};

inline std::vector<double> bellman_ford(std::size_t nodes, const std::vector<Edge>& edges,
                                        std::size_t src) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(nodes, inf);
  dist[src] = 0.0;
  for (std::size_t pass = 0; pass + 1 < nodes; ++pass) {
    bool changed = false;
    for (const Edge& e : edges) {
      if (dist[e.a] + e.w < dist[e.b]) dist[e.b] = dist[e.a] + e.w, changed = true;
      if (dist[e.b] + e.w < dist[e.a]) dist[e.a] = dist[e.b] + e.w, changed = true;
    }
    if (!changed) break;
  }
  return dist;
}

// --- rank statistics --------------------------------------------------------

inline std::vector<double> mean_rank(const std::vector<double>& x) {
  std::vector<std::size_t> ord(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) ord[i] = i;
  std::stable_sort(ord.begin(), ord.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < x.size()) {
    std::size_t j = i;
    while (j + 1 < x.size() && x[ord[j + 1]] == x[ord[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[ord[t]] = 0.5 * double(i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// tie-corrected Spearman: Pearson on mean ranks
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(mean_rank(x), mean_rank(y));
}

// --- Monte-Carlo polygon overlap --------------------------------------------

inline double mc_intersection_area(const chppi::Polygon& a, const chppi::Polygon& b,
                                   std::size_t samples, std::uint64_t seed) {
  chppi::Bbox box = chppi::bbox(a);
  chppi::Rng rng(seed);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    chppi::Point p{rng.uniform(box.min_x, box.max_x), rng.uniform(box.min_y, box.max_y)};
    if (chppi::contains(a, p) && chppi::contains(b, p)) ++hits;
  }
  return (box.max_x - box.min_x) * (box.max_y - box.min_y) * double(hits) / double(samples);
}

// --- one-sided rank-sum z (group a expected larger) --------------------------

inline double rank_sum_z(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::vector<double> ranks = mean_rank(pooled);
  double ra = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ra += ranks[i];
  double na = double(a.size()), nb = double(b.size()), n = na + nb;
  double u = ra - na * (na + 1) / 2.0;
  double mean = na * nb / 2.0;
  // tie correction over pooled value multiplicities
  std::map<double, double> mult;
  for (double v : pooled) mult[v] += 1.0;
  double tie = 0;
  for (const auto& [v, t] : mult) tie += t * t * t - t;
  double var = na * nb / 12.0 * ((n + 1.0) - tie / (n * (n - 1.0)));
  return (u - mean) / std::sqrt(var);
}

// --- dense correspondence scores ---------------------------------------------
//
// Rebuilds the weighted indicator table and the standardized residual matrix
// explicitly, then takes the leading eigenpair of S^T S with a symmetric
// eigensolver (a different decomposition path than the library). Assumes all
// three variables vary in the data. Sign is arbitrary; align before comparing.

inline std::map<std::string, double> mca_coords(const std::vector<chppi::HousingRecord>& recs) {
  std::map<std::array<std::string, 3>, double> prof;
  for (const chppi::HousingRecord& r : recs) prof[{r.floor, r.roof, r.ceiling}] += r.households;

  const std::array<const std::vector<std::string>*, 3> vocab = {
      &chppi::floor_categories(), &chppi::roof_categories(), &chppi::ceiling_categories()};
  const std::array<const char*, 3> names = {"floor", "roof", "ceiling"};

  std::array<std::set<std::string>, 3> seen;
  for (const auto& [p, w] : prof)
    for (int v = 0; v < 3; ++v) seen[std::size_t(v)].insert(p[std::size_t(v)]);

  std::vector<std::string> colkey;
  std::map<std::string, int> col;
  for (int v = 0; v < 3; ++v)
    for (const std::string& tok : *vocab[std::size_t(v)])
      if (seen[std::size_t(v)].count(tok)) {
        col[std::string(names[std::size_t(v)]) + "=" + tok] = int(colkey.size());
        colkey.push_back(std::string(names[std::size_t(v)]) + "=" + tok);
      }

  const int rows = int(prof.size());
  const int cols = int(colkey.size());
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd w(rows);
  {
    int r = 0;
    for (const auto& [p, weight] : prof) {
      w(r) = weight;
      for (int v = 0; v < 3; ++v)
        z(r, col.at(std::string(names[std::size_t(v)]) + "=" + p[std::size_t(v)])) = 1.0;
      ++r;
    }
  }
  const double total = w.sum() * 3.0;
  Eigen::VectorXd rmass = w * 3.0 / total;
  Eigen::VectorXd cmass = (z.transpose() * w) / total;

  Eigen::MatrixXd s(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      s(r, c) = (w(r) * z(r, c) / total - rmass(r) * cmass(c)) / std::sqrt(rmass(r) * cmass(c));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.transpose() * s);
  Eigen::VectorXd v = eig.eigenvectors().col(cols - 1);  // eigenvalues ascending

  std::map<std::string, double> out;
  for (int c = 0; c < cols; ++c) out[colkey[std::size_t(c)]] = v(c) / std::sqrt(cmass(c));
  return out;
}

// --- naive normalized product index ------------------------------------------

inline std::map<std::string, double> index_direct(
    const std::map<std::string, chppi::IndexInputs>& blocks, double alpha, double beta) {
  double sum = 0;
  for (const auto& [id, in] : blocks)
    sum += std::pow(in.hv, alpha) * std::pow(in.d, beta) * in.ai;
  double mean = sum / double(blocks.size());
  std::map<std::string, double> out;
  for (const auto& [id, in] : blocks)
    out[id] = std::pow(in.hv, alpha) * std::pow(in.d, beta) * in.ai / mean;
  return out;
}

// --- literal locality selection rules ------------------------------------------

inline double interp_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  double h = (double(v.size()) - 1.0) * p;
  std::size_t i = std::size_t(std::floor(h));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (h - std::floor(h)) * (v[i + 1] - v[i]);
}

inline std::vector<chppi::LocalityReport> select(const std::vector<chppi::SelectionBlock>& blocks,
                                                 const chppi::SelectionParams& prm) {
  std::vector<chppi::SelectionBlock> live;
  for (const chppi::SelectionBlock& b : blocks) {
    if (b.in_endemic) continue;
    if (b.population < prm.min_block_pop) continue;
    if (!(b.area_km2 > 0)) continue;
    if (b.population / b.area_km2 < prm.min_density_km2) continue;
    live.push_back(b);
  }
  if (live.empty()) return {};

  std::vector<double> ai;
  for (const auto& b : live) ai.push_back(b.ai);
  double cut = interp_quantile(ai, prm.extreme_percentile);

  std::map<std::string, chppi::LocalityReport> rep;
  std::map<std::string, double> pop, wai, xai;
  std::map<std::string, int> xn;
  for (const auto& b : live) {
    auto& r = rep[b.locality_id];
    r.locality_id = b.locality_id;
    r.province_id = b.province_id;
    pop[b.locality_id] += b.population;
    wai[b.locality_id] += b.ai * b.population;
    if (b.ai > cut) {
      xai[b.locality_id] += b.ai;
      xn[b.locality_id] += 1;
    }
  }
  for (auto& [loc, r] : rep) {
    r.metric1 = wai[loc] / pop[loc];
    r.has_extreme = xn[loc] > 0;
    r.metric2 = r.has_extreme ? xai[loc] / xn[loc] : 0.0;
  }

  std::map<std::string, std::vector<chppi::LocalityReport*>> prov;
  for (auto& [loc, r] : rep) prov[r.province_id].push_back(&r);
  for (auto& [p, list] : prov) {
    auto rank = [&](auto key, auto ok) {
      std::vector<chppi::LocalityReport*> pool;
      for (auto* r : list)
        if (ok(*r)) pool.push_back(r);
      std::stable_sort(pool.begin(), pool.end(),
                       [&](auto* x, auto* y) {
                         if (key(*x) != key(*y)) return key(*x) > key(*y);
                         return x->locality_id < y->locality_id;
                       });
      if (pool.size() > std::size_t(prm.top_n)) pool.resize(std::size_t(prm.top_n));
      return pool;
    };
    for (auto* r : rank([](const chppi::LocalityReport& r) { return r.metric1; },
                        [](const chppi::LocalityReport&) { return true; })) {
      r->type = chppi::LocalityType::high_mean;
      r->selected = true;
    }
    for (auto* r : rank([](const chppi::LocalityReport& r) { return r.metric2; },
                        [](const chppi::LocalityReport& r) { return r.has_extreme; })) {
      r->type = r->type == chppi::LocalityType::high_mean ? chppi::LocalityType::both
                                                          : chppi::LocalityType::extreme_blocks;
      r->selected = true;
    }
  }

  std::vector<chppi::LocalityReport> out;
  for (auto& [loc, r] : rep) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.province_id != b.province_id) return a.province_id < b.province_id;
    return a.locality_id < b.locality_id;
  });
  return out;
}

}  // namespace oracle
