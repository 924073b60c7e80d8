#include "chppi/housing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "chppi/error.hpp"

namespace chppi {

namespace {

const std::array<const char*, 3> kVariables = {"floor", "roof", "ceiling"};

const std::array<std::string, 3> kPrecarious = {"soil", "reed_straw", "no"};

const std::vector<std::string>& categories_of(int var) {
  switch (var) {
    case 0: return floor_categories();
    case 1: return roof_categories();
    default: return ceiling_categories();
  }
}

void check_token(int var, const std::string& token) {
  const auto& list = categories_of(var);
  if (std::find(list.begin(), list.end(), token) == list.end())
    raise(Errc::parse, std::string("unknown ") + kVariables[static_cast<std::size_t>(var)] +
                           " category: " + token);
}

std::string key_of(int var, const std::string& token) {
  return std::string(kVariables[static_cast<std::size_t>(var)]) + "=" + token;
}

}  // namespace

const std::vector<std::string>& floor_categories() {
  static const std::vector<std::string> v = {"ceramic", "cement", "soil", "other"};
  return v;
}

const std::vector<std::string>& roof_categories() {
  static const std::vector<std::string> v = {"membrane",     "tile_slab", "slate_tile",
                                             "metal",        "fiber_cement", "cardboard",
                                             "reed_straw",   "other"};
  return v;
}

const std::vector<std::string>& ceiling_categories() {
  static const std::vector<std::string> v = {"yes", "no"};
  return v;
}

double McaModel::profile_score(const std::string& floor, const std::string& roof,
                               const std::string& ceiling) const {
  const std::array<const std::string*, 3> tokens = {&floor, &roof, &ceiling};
  double sum = 0.0;
  int used = 0;
  for (int var = 0; var < 3; ++var) {
    const char* name = kVariables[static_cast<std::size_t>(var)];
    if (std::find(dropped_variables.begin(), dropped_variables.end(), name) !=
        dropped_variables.end())
      continue;
    auto it = category_coord.find(key_of(var, *tokens[static_cast<std::size_t>(var)]));
    if (it == category_coord.end())
      raise(Errc::unseen_category,
            key_of(var, *tokens[static_cast<std::size_t>(var)]) + " never seen at fit time");
    sum += it->second;
    ++used;
  }
  if (used == 0) raise(Errc::rank_deficient, "no variables kept by the fit");
  return sum / used;
}

McaModel fit_mca(const std::vector<HousingRecord>& records) {
  if (records.empty()) raise(Errc::degenerate_matrix, "housing fit on empty data");

  // weighted profile table; map order makes the arithmetic independent of
  // record order
  std::map<std::array<std::string, 3>, double> profiles;
  for (const HousingRecord& r : records) {
    check_token(0, r.floor);
    check_token(1, r.roof);
    check_token(2, r.ceiling);
    if (!(r.households > 0))
      raise(Errc::validation, "household count must be positive in block " + r.block_id);
    profiles[{r.floor, r.roof, r.ceiling}] += r.households;
  }

  // observed categories per variable
  std::array<std::map<std::string, double>, 3> observed;
  for (const auto& [prof, w] : profiles)
    for (int var = 0; var < 3; ++var) observed[static_cast<std::size_t>(var)][prof[static_cast<std::size_t>(var)]] += w;

  McaModel model;
  std::vector<int> kept;
  for (int var = 0; var < 3; ++var) {
    if (observed[static_cast<std::size_t>(var)].size() < 2) {
      model.dropped_variables.push_back(kVariables[static_cast<std::size_t>(var)]);
      model.warnings.push_back(std::string("constant variable dropped: ") +
                               kVariables[static_cast<std::size_t>(var)]);
    } else {
      kept.push_back(var);
    }
  }
  if (kept.empty()) raise(Errc::rank_deficient, "all housing variables constant");

  // merge profiles equal on the kept variables
  std::map<std::vector<std::string>, double> merged;
  for (const auto& [prof, w] : profiles) {
    std::vector<std::string> key;
    for (int var : kept) key.push_back(prof[static_cast<std::size_t>(var)]);
    merged[key] += w;
  }

  // column layout: kept variables in order, categories in vocabulary order
  std::map<std::string, int> col_of;
  std::vector<std::string> col_key;
  for (int var : kept) {
    for (const std::string& tok : categories_of(var)) {
      if (observed[static_cast<std::size_t>(var)].count(tok)) {
        col_of[key_of(var, tok)] = static_cast<int>(col_key.size());
        col_key.push_back(key_of(var, tok));
      }
    }
  }

  const int rows = static_cast<int>(merged.size());
  const int cols = static_cast<int>(col_key.size());
  const int q = static_cast<int>(kept.size());
  if (rows < 2) raise(Errc::rank_deficient, "only one distinct housing profile");

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(rows);
  {
    int r = 0;
    for (const auto& [key, weight] : merged) {
      w(r) = weight;
      for (int k = 0; k < q; ++k)
        z(r, col_of.at(key_of(kept[static_cast<std::size_t>(k)], key[static_cast<std::size_t>(k)]))) = 1.0;
      ++r;
    }
  }

  const double total = w.sum() * q;
  Eigen::VectorXd rmass = w * q / total;
  Eigen::VectorXd cmass = (z.transpose() * w) / total;

  // standardized residuals of the correspondence table
  Eigen::MatrixXd s(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double p = w(r) * z(r, c) / total;
      s(r, c) = (p - rmass(r) * cmass(c)) / std::sqrt(rmass(r) * cmass(c));
    }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma(0) < 1e-12)
    raise(Errc::rank_deficient, "no nontrivial correspondence dimension");
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > 1e-12) model.singular_values.push_back(sigma(i));

  for (int c = 0; c < cols; ++c)
    model.category_coord[col_key[static_cast<std::size_t>(c)]] =
        svd.matrixV()(c, 0) / std::sqrt(cmass(c));

  // sign convention: the precarious profile scores positive
  double anchor = 0.0;
  int anchored = 0;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    auto it = model.category_coord.find(
        key_of(kept[k], kPrecarious[static_cast<std::size_t>(kept[k])]));
    if (it != model.category_coord.end()) {
      anchor += it->second;
      ++anchored;
    }
  }
  bool flip;
  if (anchored > 0) {
    flip = anchor < 0;
  } else {
    // none of the precarious tokens occur: fall back to making the
    // largest-magnitude coordinate positive
    double best = 0.0;
    for (const auto& [k, v] : model.category_coord)
      if (std::abs(v) > std::abs(best)) best = v;
    flip = best < 0;
  }
  if (flip)
    for (auto& [k, v] : model.category_coord) v = -v;
  return model;
}

BlockScoreResult score_blocks(const McaModel& model, const std::vector<HousingRecord>& records) {
  std::map<std::string, std::pair<double, double>> acc;  // block -> (sum, weight)
  BlockScoreResult out;
  for (const HousingRecord& r : records) {
    check_token(0, r.floor);
    check_token(1, r.roof);
    check_token(2, r.ceiling);
    double score;
    try {
      score = model.profile_score(r.floor, r.roof, r.ceiling);
    } catch (const Error& e) {
      if (e.code() == Errc::unseen_category) {
        out.skipped_households += static_cast<std::size_t>(r.households);
        continue;
      }
      throw;
    }
    auto& slot = acc[r.block_id];
    slot.first += score * r.households;
    slot.second += r.households;
  }
  for (const auto& [block, sw] : acc)
    out.blocks.push_back(BlockHousingScore{block, sw.first / sw.second, sw.second});
  return out;
}

std::vector<AntennaHousingValue> aggregate_to_antennas(const BlockScoreResult& scores,
                                                       const std::vector<CensusBlock>& blocks,
                                                       const VoronoiDiagram& diagram) {
  std::map<std::string, const CensusBlock*> block_of;
  for (const CensusBlock& b : blocks) block_of[b.id] = &b;

  const std::size_t n = diagram.ids.size();
  std::vector<double> num(n, 0.0), den(n, 0.0);
  std::vector<Bbox> cell_boxes(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!diagram.cells[i].exterior.empty()) cell_boxes[i] = bbox(diagram.cells[i]);

  for (const BlockHousingScore& s : scores.blocks) {
    auto it = block_of.find(s.block_id);
    if (it == block_of.end())
      raise(Errc::validation, "scored block without geometry: " + s.block_id);
    const CensusBlock& b = *it->second;
    double block_area = area(b.geom);
    if (block_area <= 0.0) {
      // no measurable footprint: attribute everything to the cell holding
      // the centroid
      Point c = centroid(b.geom);
      for (std::size_t i = 0; i < n; ++i) {
        if (diagram.cells[i].exterior.empty()) continue;
        if (contains(diagram.cells[i], c)) {
          num[i] += s.score * s.households;
          den[i] += s.households;
          break;
        }
      }
      continue;
    }
    Bbox bb = bbox(b.geom);
    for (std::size_t i = 0; i < n; ++i) {
      if (diagram.cells[i].exterior.empty() || !bb.overlaps(cell_boxes[i])) continue;
      double overlap = intersection_area(b.geom, diagram.cells[i]);
      if (overlap <= 0.0 || overlap < 1e-9 * block_area) continue;
      double weight = s.households * overlap / block_area;
      num[i] += s.score * weight;
      den[i] += weight;
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return diagram.ids[a] < diagram.ids[b]; });

  std::vector<AntennaHousingValue> out;
  out.reserve(n);
  for (std::size_t i : order) {
    AntennaHousingValue v;
    v.antenna_id = diagram.ids[i];
    if (den[i] > 0.0) {
      v.value = num[i] / den[i];
      v.weight = den[i];
    } else {
      v.empty_cell = true;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::map<std::string, int> quartile_partition(const std::vector<AntennaHousingValue>& values,
                                              const std::vector<Antenna>& antennas,
                                              const Polygon& region) {
  std::map<std::string, Point> pos;
  for (const Antenna& a : antennas) pos[a.id] = a.pos;

  std::vector<std::pair<std::string, double>> usable;
  for (const AntennaHousingValue& v : values) {
    if (v.empty_cell) continue;
    auto it = pos.find(v.antenna_id);
    if (it == pos.end()) continue;
    if (contains(region, it->second)) usable.emplace_back(v.antenna_id, v.value);
  }
  if (usable.size() < 4)
    raise(Errc::too_few_antennas,
          "quartile partition needs >= 4 antennas in region, got " +
              std::to_string(usable.size()));

  std::vector<double> sorted;
  sorted.reserve(usable.size());
  for (const auto& [id, v] : usable) sorted.push_back(v);
  std::sort(sorted.begin(), sorted.end());

  // quartile from the first sorted position of the value: ties share the
  // lower quartile
  const double m = static_cast<double>(sorted.size());
  std::map<std::string, int> out;
  for (const auto& [id, v] : usable) {
    std::size_t p = static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    out[id] = 1 + static_cast<int>(std::floor(4.0 * static_cast<double>(p) / m));
  }
  return out;
}

}  // namespace chppi
