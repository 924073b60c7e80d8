#include "chppi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "chppi/civil.hpp"
#include "chppi/config.hpp"
#include "chppi/csv.hpp"
#include "chppi/error.hpp"
#include "chppi/geojson.hpp"
#include "chppi/rng.hpp"

namespace chppi {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kBlockSide = 1500.0;     // meters
constexpr double kStreetStep = 750.0;     // two street nodes per block side
constexpr double kBaseLatDeg = -32.0;     // world sits around 32S, 64W
constexpr double kCentralMeridian = -64.0;

std::string pad_id(const char* prefix, int n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, n);
  return buf;
}

struct BlockGen {
  std::string id;
  int i = 0, j = 0;        // grid cell
  int tile = 0;            // antenna tile index
  bool endemic = false;
  double pop = 0.0;
  double hh_census = 0.0;
  double precarious = 0.0;  // housing latent, 0 good .. 1 bad
  double wealth = 0.0;      // household latent center
  std::string locality;
  std::string province;
};

// Survey variables; the last one anchors score orientation.
struct SchemaVar {
  const char* name;
  int k;
};
constexpr SchemaVar kSchema[] = {
    {"water_source", 4}, {"sewage", 4},        {"floor_quality", 3}, {"roof_quality", 4},
    {"ceiling", 2},      {"cooking_fuel", 3},  {"room_occupancy", 4}, {"tenure", 3},
    {"basic_needs", 3},  {"assets", 5},        {"head_education", 7}};
constexpr int kSchemaVars = static_cast<int>(sizeof(kSchema) / sizeof(kSchema[0]));

struct HousingTier {
  const char* floor;
  const char* roof;
  const char* ceiling;
};
// ordered best to worst; the last matches the most precarious profile
constexpr HousingTier kTiers[] = {
    {"ceramic", "membrane", "yes"}, {"cement", "tile_slab", "yes"},
    {"cement", "slate_tile", "yes"}, {"cement", "metal", "no"},
    {"other", "fiber_cement", "no"}, {"soil", "cardboard", "no"},
    {"soil", "reed_straw", "no"}};
constexpr int kTierCount = static_cast<int>(sizeof(kTiers) / sizeof(kTiers[0]));

}  // namespace

SynthSummary generate_synthetic_world(const std::string& out_dir, const SynthOptions& opt) {
  if (opt.blocks < 10) raise(Errc::scale_too_small, "need at least 10 blocks");
  if (opt.users < 10) raise(Errc::scale_too_small, "need at least 10 users");
  if (opt.providers < 3) raise(Errc::scale_too_small, "need at least 3 providers");

  const int nb_x = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(opt.blocks))));
  const int nb_y = (opt.blocks + nb_x - 1) / nb_x;
  const int tiles_x = (nb_x + 1) / 2;
  const int tiles_y = (nb_y + 1) / 2;
  if (tiles_x < 2) raise(Errc::scale_too_small, "grid too narrow for an endemic strip");
  const int chaco_tiles =
      std::clamp(static_cast<int>(std::lround(tiles_x * 0.3)), 1, tiles_x - 1);
  if (chaco_tiles * tiles_y < 4)
    raise(Errc::scale_too_small, "endemic strip holds fewer than 4 antenna tiles");

  const double world_w = nb_x * kBlockSide;
  const double world_h = nb_y * kBlockSide;
  const double chaco_w = chaco_tiles * 2 * kBlockSide;

  Projection proj;
  proj.central_meridian_deg = kCentralMeridian;
  const double y_base = proj.earth_radius_m * kBaseLatDeg * M_PI / 180.0;
  auto to_lonlat = [&](double x, double y) { return proj.inverse(Point{x, y_base + y}); };
  auto lonlat_ring = [&](double x0, double y0, double x1, double y1) {
    Ring r;
    for (auto [x, y] : {std::pair{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}) {
      auto [lon, lat] = to_lonlat(x, y);
      r.push_back(Point{lon, lat});
    }
    return r;
  };

  Rng rng(derive_seed(opt.seed, "world"));

  // ---- blocks --------------------------------------------------------
  std::vector<BlockGen> blocks(opt.blocks);
  for (int b = 0; b < opt.blocks; ++b) {
    BlockGen& g = blocks[b];
    g.i = b % nb_x;
    g.j = b / nb_x;
    g.id = pad_id("B", b, 5);
    const int tx = g.i / 2, ty = g.j / 2;
    g.tile = ty * tiles_x + tx;
    g.endemic = tx < chaco_tiles;
    g.pop = std::floor(150.0 + 1850.0 * rng.uniform());
    g.hh_census = std::max(1.0, std::round(g.pop / 3.2));
    const int lt_x = g.i / 3, lt_y = g.j / 3;
    g.locality = pad_id("L", lt_x * 100 + lt_y, 4);
    const int center_col = std::min(lt_x * 3 + 1, nb_x - 1);
    g.province = pad_id("P", 1 + std::min(2, 3 * center_col / nb_x), 1);
    const double grad = nb_y > 1 ? static_cast<double>(g.j) / (nb_y - 1) : 0.5;
    g.precarious = std::clamp(0.12 + 0.72 * grad + 0.10 * (rng.uniform() - 0.5), 0.03, 0.97);
    const double cx = (g.i + 0.5) / nb_x, cy = (g.j + 0.5) / nb_y;
    g.wealth = std::clamp(0.9 - 0.55 * g.precarious - 0.25 * cx * cy +
                              0.1 * (rng.uniform() - 0.5),
                          0.02, 0.98);
  }

  std::vector<Feature> block_features;
  for (const BlockGen& g : blocks) {
    Feature f;
    f.geom_lonlat.exterior = lonlat_ring(g.i * kBlockSide, g.j * kBlockSide,
                                         (g.i + 1) * kBlockSide, (g.j + 1) * kBlockSide);
    f.properties = {{"block_id", PropertyValue::str(g.id)},
                    {"population", PropertyValue::num(g.pop)},
                    {"households", PropertyValue::num(g.hh_census)},
                    {"locality_id", PropertyValue::str(g.locality)},
                    {"province_id", PropertyValue::str(g.province)}};
    block_features.push_back(std::move(f));
  }
  write_geojson(out_dir + "/blocks.geojson", block_features);

  {
    Feature f;
    f.geom_lonlat.exterior = lonlat_ring(0, 0, world_w, world_h);
    f.properties = {{"name", PropertyValue::str("study_area")}};
    write_geojson(out_dir + "/boundary.geojson", {f});
    Feature e;
    e.geom_lonlat.exterior = lonlat_ring(0, 0, chaco_w, world_h);
    e.properties = {{"name", PropertyValue::str("endemic_region")}};
    write_geojson(out_dir + "/endemic_region.geojson", {e});
  }

  // ---- antennas (one per 2x2 block tile, at the exact tile center) ----
  const int n_ant = tiles_x * tiles_y;
  std::vector<std::string> ant_id(n_ant);
  std::vector<Point> ant_pos(n_ant);
  {
    std::vector<std::vector<std::string>> rows;
    for (int ty = 0; ty < tiles_y; ++ty)
      for (int tx = 0; tx < tiles_x; ++tx) {
        const int a = ty * tiles_x + tx;
        ant_id[a] = pad_id("A", a, 4);
        ant_pos[a] = Point{(2 * tx + 1) * kBlockSide, (2 * ty + 1) * kBlockSide};
        auto [lon, lat] = to_lonlat(ant_pos[a].x, ant_pos[a].y);
        rows.push_back({ant_id[a], format_double(lon), format_double(lat)});
      }
    write_csv(out_dir + "/antennas.csv", {"antenna_id", "lon", "lat"}, rows);
  }

  // ---- housing census ------------------------------------------------
  {
    std::vector<std::vector<std::string>> rows;
    for (const BlockGen& g : blocks) {
      double w[kTierCount], cum = 0.0;
      for (int t = 0; t < kTierCount; ++t) {
        // binomial(6, precarious) over the tier ladder
        double c = 1.0;
        for (int q = 0; q < t; ++q) c *= (6.0 - q) / (q + 1.0);
        w[t] = c * std::pow(g.precarious, t) * std::pow(1.0 - g.precarious, 6 - t);
        cum += w[t];
      }
      int counts[kTierCount] = {};
      const int n = static_cast<int>(g.hh_census);
      for (int h = 0; h < n; ++h) {
        double r = rng.uniform() * cum, acc = 0.0;
        int pick = kTierCount - 1;
        for (int t = 0; t < kTierCount; ++t) {
          acc += w[t];
          if (r <= acc) { pick = t; break; }
        }
        ++counts[pick];
      }
      for (int t = 0; t < kTierCount; ++t)
        if (counts[t] > 0)
          rows.push_back({g.id, kTiers[t].floor, kTiers[t].roof, kTiers[t].ceiling,
                          format_double(counts[t])});
    }
    write_csv(out_dir + "/housing.csv", {"block_id", "floor", "roof", "ceiling", "households"},
              rows);
  }

  // ---- street grid ---------------------------------------------------
  const int gx = 2 * nb_x + 1, gy = 2 * nb_y + 1;
  auto node_id = [&](int ix, int iy) { return pad_id("N", ix * 1000 + iy, 6); };
  int n_edges = 0;
  {
    std::vector<std::vector<std::string>> nodes, edges;
    for (int iy = 0; iy < gy; ++iy)
      for (int ix = 0; ix < gx; ++ix) {
        auto [lon, lat] = to_lonlat(ix * kStreetStep, iy * kStreetStep);
        nodes.push_back({node_id(ix, iy), format_double(lon), format_double(lat)});
        if (ix + 1 < gx)
          edges.push_back({node_id(ix, iy), node_id(ix + 1, iy), format_double(kStreetStep)});
        if (iy + 1 < gy)
          edges.push_back({node_id(ix, iy), node_id(ix, iy + 1), format_double(kStreetStep)});
      }
    n_edges = static_cast<int>(edges.size());
    write_csv(out_dir + "/street_nodes.csv", {"node_id", "lon", "lat"}, nodes);
    write_csv(out_dir + "/street_edges.csv", {"node_a", "node_b", "length_m"}, edges);
  }

  // ---- health providers ----------------------------------------------
  {
    const int n_hosp = std::max(1, opt.providers / 10);
    int n_center = std::max(1, (opt.providers - n_hosp) / 2);
    int n_post = opt.providers - n_hosp - n_center;
    if (n_post < 1) { n_post = 1; n_center = opt.providers - n_hosp - n_post; }

    const char* hosp_names[] = {"Hospital Zonal %d", "HOSPITAL Regional %d",
                                "Hospital de Agudos %d"};
    const char* center_names[] = {"Centro de Salud %d", "Centro Integrador Comunitario %d",
                                  "CENTRO DE ATENCION PRIMARIA %d"};
    const char* post_names[] = {"Posta Sanitaria %d", "Puesto Sanitario %d",
                                "posta rural %d"};
    std::vector<std::vector<std::string>> rows;
    int serial = 0;
    auto place = [&](int count, const char* const* names, double fx, double fy) {
      for (int p = 0; p < count; ++p) {
        const int ix = static_cast<int>(rng.below(static_cast<std::uint64_t>(
            std::max(1.0, fx * (gx - 1)) + 1)));
        const int iy = static_cast<int>(rng.below(static_cast<std::uint64_t>(
            std::max(1.0, fy * (gy - 1)) + 1)));
        const double x = ix * kStreetStep + 80.0 * (rng.uniform() - 0.5);
        const double y = iy * kStreetStep + 80.0 * (rng.uniform() - 0.5);
        auto [lon, lat] = to_lonlat(x, y);
        char label[64];
        std::snprintf(label, sizeof(label), names[p % 3], p + 1);
        rows.push_back({pad_id("PR", serial++, 3), format_double(lon), format_double(lat),
                        label});
      }
    };
    place(n_hosp, hosp_names, 0.45, 0.45);      // hospitals cluster low-left
    place(n_center, center_names, 0.80, 0.80);
    place(n_post, post_names, 0.90, 0.90);      // far corner stays uncovered
    // facilities no classification rule matches; the pipeline must drop them
    for (const char* junk : {"Deposito Municipal", "Farmacia del Pueblo"}) {
      auto [lon, lat] = to_lonlat(rng.uniform() * world_w, rng.uniform() * world_h);
      rows.push_back({pad_id("PR", serial++, 3), format_double(lon), format_double(lat), junk});
    }
    write_csv(out_dir + "/providers.csv", {"id", "lon", "lat", "raw_label"}, rows);

    ordered_json rules = ordered_json::array();
    for (auto [needle, cat] : std::initializer_list<std::pair<const char*, const char*>>{
             {"hospital", "hospital"},
             {"centro", "health_center"},
             {"posta", "sanitary_post"},
             {"puesto", "sanitary_post"}})
      rules.push_back({{"contains", needle}, {"category", cat}});
    write_file(out_dir + "/provider_labels.json", rules.dump(2) + "\n");
  }

  // ---- household survey ----------------------------------------------
  int n_households = 0;
  {
    std::vector<std::vector<std::string>> rows, truth;
    int serial = 0;
    for (const BlockGen& g : blocks) {
      const int n_h = 18 + static_cast<int>(rng.below(9));
      for (int h = 0; h < n_h; ++h) {
        const std::string hid = pad_id("HH", serial++, 6);
        const double u = std::clamp(g.wealth + 0.16 * rng.normal(), 1e-3, 0.999);
        std::vector<std::string> row = {hid, g.id};
        for (int v = 0; v < kSchemaVars; ++v) {
          const int k = kSchema[v].k;
          const double z = std::clamp(u + 0.06 * rng.normal(), 0.0, 0.999999);
          int val = 1 + static_cast<int>(z * k);
          if (rng.uniform() < 0.05) val += rng.below(2) == 0 ? -1 : 1;
          val = std::clamp(val, 1, k);
          row.push_back(format_double(val));
        }
        rows.push_back(std::move(row));
        truth.push_back({hid, g.id, format_double(u)});
      }
    }
    n_households = serial;
    std::vector<std::string> header = {"household_id", "block_id"};
    for (int v = 1; v <= kSchemaVars; ++v) header.push_back("v" + std::to_string(v));
    write_csv(out_dir + "/households.csv", header, rows);
    write_csv(out_dir + "/ground_truth/true_latent.csv",
              {"household_id", "block_id", "latent"}, truth);

    ordered_json schema;
    ordered_json vars = ordered_json::array();
    for (const SchemaVar& v : kSchema)
      vars.push_back({{"name", v.name}, {"categories", v.k}});
    schema["variables"] = std::move(vars);
    schema["orientation_variable"] = kSchema[kSchemaVars - 1].name;
    write_file(out_dir + "/household_schema.json", schema.dump(2) + "\n");
  }

  // ---- planted / null labels for non-endemic antenna tiles ------------
  std::vector<bool> tile_planted(n_ant, false);
  for (int ty = 0; ty < tiles_y; ++ty)
    for (int tx = chaco_tiles; tx < tiles_x; ++tx) {
      const int t = ty * tiles_x + tx;
      tile_planted[t] = (derive_seed(opt.seed, "plant:" + pad_id("T", t, 4)) & 1) != 0;
    }
  {
    std::vector<std::vector<std::string>> rows;
    for (const BlockGen& g : blocks)
      if (!g.endemic)
        rows.push_back({g.id, tile_planted[g.tile] ? "1" : "0"});
    write_csv(out_dir + "/ground_truth/planted_blocks.csv", {"block_id", "planted"}, rows);
  }

  // ---- users and call records -----------------------------------------
  std::vector<double> cum_pop(blocks.size());
  double total_pop = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    total_pop += blocks[b].pop;
    cum_pop[b] = total_pop;
  }

  struct UserGen {
    int block = 0;
    int antenna = 0;
    bool endemic = false;
    std::vector<int> partners;
    int chaco_partner = -1;
  };
  std::vector<UserGen> users(opt.users);
  std::vector<std::string> user_id(opt.users);
  std::vector<int> endemic_users, outside_users;
  for (int u = 0; u < opt.users; ++u) {
    user_id[u] = pad_id("U", u, 6);
    const double r = rng.uniform() * total_pop;
    const int b = static_cast<int>(
        std::lower_bound(cum_pop.begin(), cum_pop.end(), r) - cum_pop.begin());
    users[u].block = std::min<int>(b, opt.blocks - 1);
    users[u].antenna = blocks[users[u].block].tile;
    users[u].endemic = blocks[users[u].block].endemic;
    (users[u].endemic ? endemic_users : outside_users).push_back(u);
  }

  {
    std::vector<std::vector<std::string>> rows;
    for (int u = 0; u < opt.users; ++u)
      rows.push_back({user_id[u], ant_id[users[u].antenna], blocks[users[u].block].id});
    write_csv(out_dir + "/ground_truth/true_homes.csv",
              {"user_id", "antenna_id", "block_id"}, rows);
  }

  // base contacts never cross the endemic boundary; only planted contacts do
  auto pick_partner = [&](int self, const std::vector<int>& pool) {
    if (pool.size() < 2) return -1;
    for (int tries = 0; tries < 8; ++tries) {
      const int v = pool[rng.below(pool.size())];
      if (v != self) return v;
    }
    return -1;
  };
  for (int u = 0; u < opt.users; ++u) {
    const auto& pool = users[u].endemic ? endemic_users : outside_users;
    const int n_base = 1 + static_cast<int>(rng.below(2));
    for (int c = 0; c < n_base; ++c) {
      const int v = pick_partner(u, pool);
      if (v >= 0) users[u].partners.push_back(v);
    }
    if (!users[u].endemic && tile_planted[users[u].antenna] && !endemic_users.empty() &&
        rng.uniform() < opt.endemic_contact_rate)
      users[u].chaco_partner = endemic_users[rng.below(endemic_users.size())];
  }

  const std::int64_t base_days = days_from_civil(2026, 3, 2);  // a Monday
  std::vector<std::vector<std::string>> cdr;
  auto emit_call = [&](int u, int v, bool night, int tower_u) {
    const int week = static_cast<int>(rng.below(20));
    int wd, sec;
    if (night) {
      if (rng.below(10) < 7) {  // evening leg
        wd = static_cast<int>(rng.below(4));
        sec = 20 * 3600 + static_cast<int>(rng.below(4 * 3600));
      } else {  // small-hours leg
        wd = 1 + static_cast<int>(rng.below(4));
        sec = static_cast<int>(rng.below(6 * 3600));
      }
    } else {
      wd = static_cast<int>(rng.below(5));
      sec = 9 * 3600 + static_cast<int>(rng.below(9 * 3600));
    }
    const std::string ts = format_iso_datetime({base_days + week * 7 + wd, sec});
    const std::string dur = format_double(30 + static_cast<int>(rng.below(600)));
    cdr.push_back({user_id[u], user_id[v], "outgoing", ts, dur, ant_id[tower_u]});
    cdr.push_back({user_id[u], user_id[v], "incoming", ts, dur, ant_id[users[v].antenna]});
  };

  for (int u = 0; u < opt.users; ++u) {
    std::vector<int> everyone = users[u].partners;
    if (users[u].chaco_partner >= 0) everyone.push_back(users[u].chaco_partner);
    if (everyone.empty()) everyone.push_back((u + 1) % opt.users);

    const int n_night = 5 + static_cast<int>(rng.below(4));
    for (int c = 0; c < n_night; ++c)
      emit_call(u, everyone[rng.below(everyone.size())], true, users[u].antenna);
    if (rng.below(4) == 0) {  // one stray night record away from home
      int other = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_ant)));
      if (other == users[u].antenna) other = (other + 1) % n_ant;
      emit_call(u, everyone[rng.below(everyone.size())], true, other);
    }
    const int n_day = 2 + static_cast<int>(rng.below(3));
    for (int c = 0; c < n_day; ++c)
      emit_call(u, everyone[rng.below(everyone.size())], false, users[u].antenna);
    if (users[u].chaco_partner >= 0)
      emit_call(u, users[u].chaco_partner, false, users[u].antenna);
  }

  // malformed rows the ingest stage must count and drop
  for (int r = 0; r < 12; ++r) {
    const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.users)));
    const std::string ts = format_iso_datetime({base_days + static_cast<int>(rng.below(140)),
                                                10 * 3600 + static_cast<int>(rng.below(3600))});
    cdr.push_back({user_id[u], user_id[(u + 1) % opt.users], "outgoing", ts, "60", "A_BAD"});
  }
  for (int r = 0; r < 8; ++r) {
    const int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(opt.users)));
    const std::string ts = format_iso_datetime({base_days + static_cast<int>(rng.below(140)),
                                                11 * 3600 + static_cast<int>(rng.below(3600))});
    cdr.push_back({user_id[u], user_id[u], "outgoing", ts, "45", ant_id[users[u].antenna]});
  }
  write_csv(out_dir + "/cdr.csv",
            {"originator", "destinatary", "direction", "timestamp", "duration", "tower"}, cdr);

  // ---- runnable config -------------------------------------------------
  {
    PipelineConfig cfg;
    cfg.antennas = "antennas.csv";
    cfg.cdr = "cdr.csv";
    cfg.blocks = "blocks.geojson";
    cfg.boundary = "boundary.geojson";
    cfg.endemic_region = "endemic_region.geojson";
    cfg.housing = "housing.csv";
    cfg.providers = "providers.csv";
    cfg.provider_labels = "provider_labels.json";
    cfg.street_nodes = "street_nodes.csv";
    cfg.street_edges = "street_edges.csv";
    cfg.households = "households.csv";
    cfg.household_schema = "household_schema.json";
    cfg.output_dir = "out";
    cfg.projection = proj;
    cfg.seed = opt.seed;
    cfg.ae_epochs = 40;
    write_file(out_dir + "/config.json", config_to_json(cfg));
  }

  SynthSummary sum;
  sum.blocks = opt.blocks;
  sum.antennas = n_ant;
  sum.users = opt.users;
  sum.providers = opt.providers;
  sum.cdr_rows = static_cast<int>(cdr.size());
  sum.households = n_households;
  sum.street_nodes = gx * gy;
  sum.street_edges = n_edges;
  return sum;
}

}  // namespace chppi
