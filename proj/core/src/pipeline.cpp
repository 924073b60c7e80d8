#include "chppi/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chppi/error.hpp"
#include "chppi/smooth_cdf.hpp"
#include "chppi/stats.hpp"

namespace chppi {

HvResult health_vulnerability(const std::map<std::string, double>& delta,
                              const std::map<std::string, double>& eta) {
  std::vector<std::string> ids;
  for (const auto& [block, v] : delta)
    if (eta.count(block)) ids.push_back(block);
  if (ids.size() < 10)
    raise(Errc::domain_error,
          "health vulnerability needs >= 10 blocks with both inputs, got " +
              std::to_string(ids.size()));

  HvResult res;
  std::vector<double> dvals(ids.size()), evals(ids.size());
  double max_finite = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double v = delta.at(ids[i]);
    if (std::isfinite(v)) max_finite = std::max(max_finite, v);
    evals[i] = eta.at(ids[i]);
  }
  if (!std::isfinite(max_finite))
    raise(Errc::degenerate_matrix, "every block is unreachable");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double v = delta.at(ids[i]);
    if (!std::isfinite(v)) {
      v = max_finite;
      res.imputed.push_back(ids[i]);
    }
    dvals[i] = v;
  }

  auto constant = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) == *std::min_element(v.begin(), v.end());
  };
  if (constant(dvals)) raise(Errc::degenerate_matrix, "travel time constant across blocks");
  if (constant(evals)) raise(Errc::degenerate_matrix, "socio-economic level constant across blocks");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(ids.size()), 2);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = dvals[i];
    x(static_cast<Eigen::Index>(i), 1) = evals[i];
  }
  SpcaResult pca = spca(x);
  std::vector<double> scores(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i)
    scores[i] = pca.scores(static_cast<Eigen::Index>(i), 0);
  res.first_component_share = pca.explained(0);

  // vulnerability must grow with travel time
  if (spearman_on_rankits(scores, dvals) < 0)
    for (double& s : scores) s = -s;

  SmoothCdf cdf = fit_smooth_cdf(scores);
  res.cdf_fallback = cdf.fallback();
  for (std::size_t i = 0; i < ids.size(); ++i) res.hv[ids[i]] = cdf(scores[i]);
  return res;
}

DensityResult density_scale(const std::map<std::string, DensityInput>& blocks) {
  DensityResult res;
  std::vector<std::string> ids;
  std::vector<double> density;
  for (const auto& [block, in] : blocks) {
    if (!(in.area_km2 > 0.0)) {
      res.zero_area.push_back(block);
      continue;
    }
    ids.push_back(block);
    density.push_back(in.population / in.area_km2);
  }
  if (ids.size() < 10)
    raise(Errc::domain_error, "density scale needs >= 10 blocks with positive area");
  SmoothCdf cdf = fit_smooth_cdf(density);
  res.cdf_fallback = cdf.fallback();
  for (std::size_t i = 0; i < ids.size(); ++i) res.d[ids[i]] = cdf(density[i]);
  return res;
}

std::map<std::string, double> chppi_index(const std::map<std::string, IndexInputs>& blocks,
                                          double alpha, double beta) {
  if (blocks.empty()) raise(Errc::validation, "index on an empty block set");
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    raise(Errc::validation, "exponents must be non-negative");
  double sum = 0.0;
  std::map<std::string, double> raw;
  for (const auto& [block, in] : blocks) {
    // pow(x, 0) == 1 exactly, so alpha = beta = 0 reduces to plain affinity
    double v = std::pow(in.hv, alpha) * std::pow(in.d, beta) * in.ai;
    raw[block] = v;
    sum += v;
  }
  if (sum <= 0.0) raise(Errc::all_zero_affinity, "every block has zero affinity mass");
  double mean = sum / static_cast<double>(blocks.size());
  for (auto& [block, v] : raw) v /= mean;
  return raw;
}

const char* locality_type_name(LocalityType t) {
  switch (t) {
    case LocalityType::none: return "none";
    case LocalityType::high_mean: return "high_mean";
    case LocalityType::extreme_blocks: return "extreme_blocks";
    case LocalityType::both: return "both";
  }
  return "none";
}

std::vector<LocalityReport> select_localities(const std::vector<SelectionBlock>& blocks,
                                              const SelectionParams& params) {
  // survival filter: outside the endemic region, enough people, dense enough
  std::vector<const SelectionBlock*> surviving;
  for (const SelectionBlock& b : blocks) {
    if (b.in_endemic) continue;
    if (!(b.population >= params.min_block_pop)) continue;
    if (!(b.area_km2 > 0.0)) continue;
    if (!(b.population / b.area_km2 >= params.min_density_km2)) continue;
    surviving.push_back(&b);
  }
  if (surviving.empty()) return {};

  // national affinity threshold for "extreme" blocks
  std::vector<double> ai;
  ai.reserve(surviving.size());
  for (const SelectionBlock* b : surviving) ai.push_back(b->ai);
  std::sort(ai.begin(), ai.end());
  double threshold = quantile_sorted(ai, params.extreme_percentile);

  struct Acc {
    std::string province;
    double pop = 0.0;
    double weighted_ai = 0.0;
    double extreme_ai = 0.0;
    int extreme_blocks = 0;
  };
  std::map<std::string, Acc> acc;
  for (const SelectionBlock* b : surviving) {
    Acc& a = acc[b->locality_id];
    if (a.province.empty()) a.province = b->province_id;
    a.pop += b->population;
    a.weighted_ai += b->ai * b->population;
    if (b->ai > threshold) {
      a.extreme_ai += b->ai;
      a.extreme_blocks += 1;
    }
  }

  std::vector<LocalityReport> reports;
  for (const auto& [loc, a] : acc) {
    LocalityReport r;
    r.locality_id = loc;
    r.province_id = a.province;
    r.metric1 = a.pop > 0 ? a.weighted_ai / a.pop : 0.0;
    r.has_extreme = a.extreme_blocks > 0;
    r.metric2 = r.has_extreme ? a.extreme_ai / a.extreme_blocks : 0.0;
    reports.push_back(std::move(r));
  }

  // per-province rankings; ties fall to the smaller locality id
  std::map<std::string, std::vector<LocalityReport*>> by_province;
  for (LocalityReport& r : reports) by_province[r.province_id].push_back(&r);
  for (auto& [prov, list] : by_province) {
    auto top_by = [&](auto metric, auto eligible, auto mark) {
      std::vector<LocalityReport*> pool;
      for (LocalityReport* r : list)
        if (eligible(*r)) pool.push_back(r);
      std::sort(pool.begin(), pool.end(), [&](LocalityReport* x, LocalityReport* y) {
        double mx = metric(*x), my = metric(*y);
        if (mx != my) return mx > my;
        return x->locality_id < y->locality_id;
      });
      for (std::size_t i = 0; i < pool.size() && i < static_cast<std::size_t>(params.top_n); ++i)
        mark(*pool[i]);
    };
    top_by([](const LocalityReport& r) { return r.metric1; },
           [](const LocalityReport&) { return true; },
           [](LocalityReport& r) {
             r.type = LocalityType::high_mean;
             r.selected = true;
           });
    top_by([](const LocalityReport& r) { return r.metric2; },
           [](const LocalityReport& r) { return r.has_extreme; },
           [](LocalityReport& r) {
             r.type = r.type == LocalityType::high_mean ? LocalityType::both
                                                        : LocalityType::extreme_blocks;
             r.selected = true;
           });
  }

  std::sort(reports.begin(), reports.end(), [](const LocalityReport& a, const LocalityReport& b) {
    if (a.province_id != b.province_id) return a.province_id < b.province_id;
    return a.locality_id < b.locality_id;
  });
  return reports;
}

}  // namespace chppi
