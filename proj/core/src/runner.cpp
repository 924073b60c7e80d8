#include "chppi/runner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "chppi/affinity.hpp"
#include "chppi/autoencoder.hpp"
#include "chppi/civil.hpp"
#include "chppi/csv.hpp"
#include "chppi/error.hpp"
#include "chppi/geojson.hpp"
#include "chppi/health_access.hpp"
#include "chppi/housing.hpp"
#include "chppi/pipeline.hpp"
#include "chppi/rng.hpp"

namespace chppi {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
  return cfg.output_dir + "/" + name;
}

// ---------------------------------------------------------------- loaders

std::vector<Antenna> load_antennas(const PipelineConfig& cfg) {
  CsvTable t = read_csv(cfg.antennas);
  expect_header(t, {"antenna_id", "lon", "lat"}, "antennas");
  std::vector<Antenna> out;
  std::set<std::string> seen;
  for (const auto& r : t.rows) {
    if (!seen.insert(r[0]).second)
      raise(Errc::validation, "duplicate antenna id: " + r[0]);
    Antenna a;
    a.id = r[0];
    a.pos_lonlat = Point{parse_double(r[1]), parse_double(r[2])};
    a.pos = cfg.projection.project(a.pos_lonlat.x, a.pos_lonlat.y);
    out.push_back(std::move(a));
  }
  if (out.empty()) raise(Errc::validation, "antennas file has no rows");
  return out;
}

std::vector<CensusBlock> load_blocks(const PipelineConfig& cfg) {
  std::vector<CensusBlock> blocks = read_blocks_geojson(cfg.blocks, cfg.projection);
  std::set<std::string> seen;
  for (const CensusBlock& b : blocks)
    if (!seen.insert(b.id).second) raise(Errc::validation, "duplicate block id: " + b.id);
  return blocks;
}

VoronoiDiagram antenna_diagram(const PipelineConfig& cfg, const std::vector<Antenna>& antennas) {
  Polygon boundary = read_region_geojson(cfg.boundary, cfg.projection);
  std::vector<std::pair<std::string, Point>> sites;
  for (const Antenna& a : antennas) sites.emplace_back(a.id, a.pos);
  return voronoi_partition(sites, boundary);
}

std::vector<CallRecord> load_clean_cdr(const PipelineConfig& cfg) {
  CsvTable t = read_csv(out_path(cfg, "cdr_clean.csv"));
  expect_header(t, {"originator", "destinatary", "direction", "weekday", "seconds",
                    "duration", "tower"},
                "cdr_clean");
  std::vector<CallRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    CallRecord c;
    c.originator = r[0];
    c.destinatary = r[1];
    c.direction = r[2] == "incoming" ? CallDirection::incoming : CallDirection::outgoing;
    c.weekday = static_cast<int>(parse_double(r[3]));
    c.seconds_of_day = static_cast<int>(parse_double(r[4]));
    c.duration_s = parse_double(r[5]);
    c.tower = r[6];
    out.push_back(std::move(c));
  }
  return out;
}

// two-column csv into a map; empty values are skipped
std::map<std::string, double> load_value_column(const std::string& path,
                                                const std::vector<std::string>& header,
                                                std::size_t key_col, std::size_t val_col,
                                                const std::string& what) {
  CsvTable t = read_csv(path);
  expect_header(t, header, what);
  std::map<std::string, double> out;
  for (const auto& r : t.rows)
    if (!r[val_col].empty()) out[r[key_col]] = parse_double(r[val_col]);
  return out;
}

std::set<std::string> load_flagged_ids(const std::string& path) {
  if (!file_exists(path)) return {};
  CsvTable t = read_csv(path);
  std::set<std::string> out;
  for (const auto& r : t.rows) out.insert(r[0]);
  return out;
}

int require_int(const std::string& s, const std::string& what) {
  double d = parse_double(s);
  int v = static_cast<int>(std::llround(d));
  if (static_cast<double>(v) != d) raise(Errc::validation, what + ": not an integer: " + s);
  return v;
}

// ---------------------------------------------------------------- manifest

std::string manifest_path(const PipelineConfig& cfg) { return out_path(cfg, "manifest.json"); }

ordered_json load_manifest(const PipelineConfig& cfg) {
  ordered_json doc = ordered_json::object();
  if (file_exists(manifest_path(cfg))) {
    try {
      doc = ordered_json::parse(read_file(manifest_path(cfg)));
    } catch (...) {
      doc = ordered_json::object();
    }
    if (!doc.is_object()) doc = ordered_json::object();
  }
  if (!doc.contains("stages") || !doc["stages"].is_object())
    doc["stages"] = ordered_json::object();
  return doc;
}

void save_manifest(const PipelineConfig& cfg, const ordered_json& doc) {
  ordered_json out;
  out["config_hash"] = cfg.config_hash;
  out["seed"] = cfg.seed;
  out["alpha"] = cfg.alpha;
  out["beta"] = cfg.beta;
  ordered_json stages = ordered_json::object();
  for (const std::string& name : pipeline_stages())
    if (doc["stages"].contains(name)) stages[name] = doc["stages"][name];
  out["stages"] = std::move(stages);
  write_file(manifest_path(cfg), out.dump(2) + "\n");
}

// Reject reuse of an output directory computed under different settings.
void check_manifest_compatible(const PipelineConfig& cfg, bool force) {
  if (force || !file_exists(manifest_path(cfg))) return;
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(manifest_path(cfg)));
  } catch (...) {
    return;
  }
  if (!doc.is_object()) return;
  const bool same = doc.value("config_hash", std::uint64_t{0}) == cfg.config_hash &&
                    doc.value("seed", std::uint64_t{0}) == cfg.seed &&
                    doc.value("alpha", 0.0) == cfg.alpha && doc.value("beta", 0.0) == cfg.beta;
  if (!same)
    raise(Errc::validation,
          "output dir holds results for different settings; rerun with force or a clean dir");
}

// ------------------------------------------------------------------ stages

ordered_json stage_ingest(const PipelineConfig& cfg) {
  validate_config(cfg);
  std::set<std::string> towers;
  for (const Antenna& a : load_antennas(cfg)) towers.insert(a.id);

  CsvTable t = read_csv(cfg.cdr);
  expect_header(t, {"originator", "destinatary", "direction", "timestamp", "duration", "tower"},
                "cdr");
  std::int64_t bad_direction = 0, bad_timestamp = 0, unknown_tower = 0, self_call = 0,
               bad_duration = 0;
  std::vector<std::vector<std::string>> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    if (r[2] != "outgoing" && r[2] != "incoming") {
      ++bad_direction;
      continue;
    }
    LocalDateTime ts;
    try {
      ts = parse_iso_datetime(r[3]);
    } catch (const Error&) {
      ++bad_timestamp;
      continue;
    }
    if (!towers.count(r[5])) {
      ++unknown_tower;
      continue;
    }
    if (r[0] == r[1]) {
      ++self_call;
      continue;
    }
    double dur = 0.0;
    try {
      dur = parse_double(r[4]);
    } catch (const Error&) {
      ++bad_duration;
      continue;
    }
    if (!(dur >= 0.0)) {
      ++bad_duration;
      continue;
    }
    rows.push_back({r[0], r[1], r[2], std::to_string(weekday_from_days(ts.days)),
                    std::to_string(ts.seconds_of_day), r[4], r[5]});
  }
  write_csv(out_path(cfg, "cdr_clean.csv"),
            {"originator", "destinatary", "direction", "weekday", "seconds", "duration",
             "tower"},
            rows);

  ordered_json sec;
  sec["rows_in"] = t.rows.size();
  sec["rows_kept"] = rows.size();
  sec["dropped"] = {{"bad_direction", bad_direction},
                    {"bad_timestamp", bad_timestamp},
                    {"unknown_tower", unknown_tower},
                    {"self_call", self_call},
                    {"bad_duration", bad_duration}};
  return sec;
}

ordered_json stage_housing(const PipelineConfig& cfg) {
  CsvTable t = read_csv(cfg.housing);
  expect_header(t, {"block_id", "floor", "roof", "ceiling", "households"}, "housing");
  std::vector<HousingRecord> recs;
  for (const auto& r : t.rows)
    recs.push_back({r[0], r[1], r[2], r[3], parse_double(r[4])});

  McaModel model = fit_mca(recs);
  BlockScoreResult scored = score_blocks(model, recs);

  std::vector<Antenna> antennas = load_antennas(cfg);
  std::vector<CensusBlock> blocks = load_blocks(cfg);
  VoronoiDiagram diagram = antenna_diagram(cfg, antennas);
  Polygon endemic = read_region_geojson(cfg.endemic_region, cfg.projection);

  std::vector<AntennaHousingValue> vals = aggregate_to_antennas(scored, blocks, diagram);
  std::map<std::string, int> quart = quartile_partition(vals, antennas, endemic);

  // in-region antennas with an empty cell still capture calls; rank them in
  // the lowest quartile and say so
  std::vector<std::string> imputed;
  for (const Antenna& a : antennas)
    if (!quart.count(a.id) && contains(endemic, a.pos)) {
      quart[a.id] = 1;
      imputed.push_back(a.id);
    }

  std::map<std::string, const AntennaHousingValue*> by_id;
  for (const AntennaHousingValue& v : vals) by_id[v.antenna_id] = &v;
  std::vector<std::vector<std::string>> rows;
  std::size_t empty_cells = 0;
  for (const Antenna& a : antennas) {
    const AntennaHousingValue* v = by_id.count(a.id) ? by_id[a.id] : nullptr;
    const bool empty_cell = !v || v->empty_cell;
    if (empty_cell) ++empty_cells;
    rows.push_back({a.id,
                    empty_cell ? "" : format_double(v->value),
                    quart.count(a.id) ? std::to_string(quart[a.id]) : ""});
  }
  write_csv(out_path(cfg, "antenna_housing.csv"),
            {"antenna_id", "housing_score", "quartile"}, rows);

  double scored_households = 0.0;
  for (const BlockHousingScore& b : scored.blocks) scored_households += b.households;
  ordered_json sec;
  sec["housing_rows"] = t.rows.size();
  sec["blocks_scored"] = scored.blocks.size();
  sec["households_scored"] = scored_households;
  sec["skipped_households"] = scored.skipped_households;
  sec["dropped_variables"] = model.dropped_variables;
  sec["empty_cells"] = empty_cells;
  sec["quartiles_assigned"] = quart.size();
  sec["imputed_quartile"] = imputed;
  return sec;
}

ordered_json stage_affinity(const PipelineConfig& cfg) {
  std::vector<CallRecord> records = load_clean_cdr(cfg);
  std::map<std::string, HomeInfo> homes =
      detect_home_antennas(records, cfg.seed, cfg.night_window, cfg.threads);
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [user, info] : homes)
      rows.push_back({user, info.antenna, std::to_string(info.night_calls)});
    write_csv(out_path(cfg, "homes.csv"), {"user_id", "home_antenna", "night_calls"}, rows);
  }

  SocialGraph graph = build_social_graph(records, cfg.min_edge_calls);

  std::vector<Antenna> antennas = load_antennas(cfg);
  Polygon endemic = read_region_geojson(cfg.endemic_region, cfg.projection);
  std::map<std::string, int> quart;
  {
    CsvTable t = read_csv(out_path(cfg, "antenna_housing.csv"));
    expect_header(t, {"antenna_id", "housing_score", "quartile"}, "antenna_housing");
    for (const auto& r : t.rows)
      if (!r[2].empty()) quart[r[0]] = require_int(r[2], "quartile");
  }
  std::map<std::string, int> seeds = assign_seed_affinity(antennas, endemic, quart);
  PropagationResult prop = propagate_affinity(graph, homes, seeds, cfg.include_self);

  std::vector<AntennaTuple> tuples = tally_antenna_tuples(homes, prop.affinity, antennas);
  {
    std::vector<std::vector<std::string>> rows;
    for (const AntennaTuple& tp : tuples) {
      std::vector<std::string> row = {tp.antenna_id};
      for (std::int64_t c : tp.counts) row.push_back(std::to_string(c));
      rows.push_back(std::move(row));
    }
    write_csv(out_path(cfg, "antenna_tuples.csv"),
              {"antenna_id", "c0", "c1", "c2", "c3", "c4"}, rows);
  }

  std::vector<CensusBlock> blocks = load_blocks(cfg);
  VoronoiDiagram diagram = antenna_diagram(cfg, antennas);
  std::vector<BlockAffinity> bai = block_affinity_index(tuples, diagram, blocks);
  std::vector<std::vector<std::string>> ai_rows, flag_rows;
  std::size_t uncovered = 0;
  for (const BlockAffinity& b : bai) {
    ai_rows.push_back({b.block_id, format_double(b.ai)});
    if (b.uncovered) {
      flag_rows.push_back({b.block_id, "uncovered"});
      ++uncovered;
    }
  }
  write_csv(out_path(cfg, "block_ai.csv"), {"block_id", "AI"}, ai_rows);
  write_csv(out_path(cfg, "affinity_flags.csv"), {"block_id", "flag"}, flag_rows);

  std::array<std::int64_t, 5> level_totals{};
  for (const AntennaTuple& tp : tuples)
    for (int k = 0; k < 5; ++k) level_totals[k] += tp.counts[k];
  ordered_json sec;
  sec["records"] = records.size();
  sec["users_homed"] = homes.size();
  sec["graph_edges"] = graph.edges.size();
  sec["users_in_graph_without_home"] = prop.users_without_home;
  sec["users_by_level"] = level_totals;
  sec["blocks"] = bai.size();
  sec["uncovered_blocks"] = uncovered;
  return sec;
}

ProviderCategory category_from_name(const std::string& s) {
  if (s == "hospital") return ProviderCategory::hospital;
  if (s == "health_center") return ProviderCategory::health_center;
  if (s == "sanitary_post") return ProviderCategory::sanitary_post;
  raise(Errc::validation, "unknown provider category: " + s);
}

ordered_json stage_access(const PipelineConfig& cfg) {
  std::vector<StreetNode> nodes;
  {
    CsvTable t = read_csv(cfg.street_nodes);
    expect_header(t, {"node_id", "lon", "lat"}, "street_nodes");
    for (const auto& r : t.rows)
      nodes.push_back({r[0], cfg.projection.project(parse_double(r[1]), parse_double(r[2]))});
  }
  std::vector<StreetEdge> edges;
  {
    CsvTable t = read_csv(cfg.street_edges);
    expect_header(t, {"node_a", "node_b", "length_m"}, "street_edges");
    for (const auto& r : t.rows) edges.push_back({r[0], r[1], parse_double(r[2])});
  }
  StreetGraph graph = StreetGraph::build(nodes, edges);

  std::vector<RawProvider> raw;
  {
    CsvTable t = read_csv(cfg.providers);
    expect_header(t, {"id", "lon", "lat", "raw_label"}, "providers");
    for (const auto& r : t.rows)
      raw.push_back({r[0], cfg.projection.project(parse_double(r[1]), parse_double(r[2])),
                     r[3]});
  }
  std::vector<LabelRule> rules;
  {
    ordered_json doc;
    try {
      doc = ordered_json::parse(read_file(cfg.provider_labels));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::validation, cfg.provider_labels + ": " + e.what());
    }
    if (!doc.is_array()) raise(Errc::validation, "provider label rules must be an array");
    for (const auto& r : doc)
      rules.push_back({r.at("contains").get<std::string>(),
                       category_from_name(r.at("category").get<std::string>())});
  }
  ClassifyResult cls = classify_providers(raw, rules);

  std::vector<CensusBlock> blocks = load_blocks(cfg);
  AccessOptions opt;
  opt.speed_kmh = cfg.speed_kmh;
  opt.knn_candidates = static_cast<std::size_t>(cfg.knn_candidates);
  opt.sample_points = static_cast<std::size_t>(cfg.sample_points);
  opt.seed = cfg.seed;
  opt.threads = cfg.threads;
  std::vector<BlockAccess> acc = block_travel_times(blocks, cls.providers, graph, opt);

  std::vector<std::vector<std::string>> rows;
  std::size_t unreachable = 0, degenerate = 0;
  for (const BlockAccess& a : acc) {
    if (a.unreachable) ++unreachable;
    if (a.degenerate_geom) ++degenerate;
    rows.push_back({a.block_id, format_double(a.minutes[0]), format_double(a.minutes[1]),
                    format_double(a.minutes[2]), format_double(a.delta),
                    a.unreachable ? "1" : "0"});
  }
  write_csv(out_path(cfg, "block_access.csv"),
            {"block_id", "t_hospital", "t_center", "t_post", "delta_r", "unreachable_flag"},
            rows);

  std::array<std::size_t, 3> by_cat{};
  for (const HealthProvider& p : cls.providers) ++by_cat[static_cast<int>(p.category)];
  ordered_json sec;
  sec["street_nodes"] = nodes.size();
  sec["street_edges"] = edges.size();
  sec["providers_in"] = raw.size();
  sec["providers"] = {{"hospital", by_cat[0]},
                      {"health_center", by_cat[1]},
                      {"sanitary_post", by_cat[2]}};
  sec["discarded_providers"] = cls.discarded;
  sec["blocks"] = acc.size();
  sec["unreachable_blocks"] = unreachable;
  sec["degenerate_geometry_blocks"] = degenerate;
  return sec;
}

OrdinalSchema load_schema(const PipelineConfig& cfg) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_file(cfg.household_schema));
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::validation, cfg.household_schema + ": " + e.what());
  }
  OrdinalSchema schema;
  if (!doc.contains("variables") || !doc["variables"].is_array() || doc["variables"].empty())
    raise(Errc::validation, "household schema lists no variables");
  for (const auto& v : doc["variables"])
    schema.variables.push_back(
        {v.at("name").get<std::string>(), v.at("categories").get<int>()});
  if (doc.contains("orientation_variable")) {
    const std::string name = doc["orientation_variable"].get<std::string>();
    schema.orientation_variable = -1;
    for (std::size_t i = 0; i < schema.variables.size(); ++i)
      if (schema.variables[i].name == name)
        schema.orientation_variable = static_cast<int>(i);
    if (schema.orientation_variable < 0)
      raise(Errc::validation, "orientation variable not in schema: " + name);
  }
  return schema;
}

ordered_json stage_sei(const PipelineConfig& cfg) {
  OrdinalSchema schema = load_schema(cfg);
  std::vector<std::string> header = {"household_id", "block_id"};
  for (std::size_t v = 1; v <= schema.variables.size(); ++v)
    header.push_back("v" + std::to_string(v));

  CsvTable t = read_csv(cfg.households);
  expect_header(t, header, "households");
  std::vector<std::vector<int>> rows;
  std::vector<std::string> hh_ids, block_of;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    hh_ids.push_back(r[0]);
    block_of.push_back(r[1]);
    std::vector<int> vals;
    for (std::size_t c = 2; c < r.size(); ++c)
      vals.push_back(require_int(r[c], "household " + r[0]));
    rows.push_back(std::move(vals));
  }

  Eigen::MatrixXd x = encode_thermometer(schema, rows);
  AutoencoderConfig acfg;
  acfg.d1 = cfg.ae_d1;
  acfg.dropout = cfg.ae_dropout;
  acfg.epochs = cfg.ae_epochs;
  acfg.batch = cfg.ae_batch;
  acfg.learning_rate = cfg.ae_learning_rate;
  acfg.seed = derive_seed(cfg.seed, "autoencoder");
  AutoencoderModel model = train_autoencoder(x, acfg);
  const double explained = evaluate_model(model, x, schema);
  HouseholdScores scores = score_households(model, x, schema, rows);

  {
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < hh_ids.size(); ++i)
      out.push_back({hh_ids[i], format_double(scores.s[i])});
    write_csv(out_path(cfg, "household_scores.csv"), {"household_id", "s_i"}, out);
  }

  std::vector<std::string> registry;
  for (const CensusBlock& b : load_blocks(cfg)) registry.push_back(b.id);
  BlockSei sei = trimean_blocks(scores.s, block_of, registry);
  {
    std::vector<std::vector<std::string>> out;
    for (const auto& [block, eta] : sei.eta) out.push_back({block, format_double(eta)});
    write_csv(out_path(cfg, "block_eta.csv"), {"block_id", "eta_r"}, out);
  }

  ordered_json sec;
  sec["households"] = rows.size();
  sec["code_width"] = x.cols();
  sec["explanation_metric"] = explained;
  sec["final_epoch_loss"] = model.epoch_loss.empty() ? 0.0 : model.epoch_loss.back();
  sec["orientation_flipped"] = scores.flipped;
  sec["blocks_scored"] = sei.eta.size();
  sec["blocks_without_households"] = sei.empty_blocks.size();
  return sec;
}

ordered_json stage_vulnerability(const PipelineConfig& cfg) {
  std::map<std::string, double> delta = load_value_column(
      out_path(cfg, "block_access.csv"),
      {"block_id", "t_hospital", "t_center", "t_post", "delta_r", "unreachable_flag"}, 0, 4,
      "block_access");
  std::map<std::string, double> eta = load_value_column(
      out_path(cfg, "block_eta.csv"), {"block_id", "eta_r"}, 0, 1, "block_eta");

  HvResult hv = health_vulnerability(delta, eta);

  std::vector<std::vector<std::string>> rows, flags;
  for (const auto& [block, v] : hv.hv) rows.push_back({block, format_double(v)});
  for (const std::string& b : hv.imputed) flags.push_back({b, "imputed_delta"});
  write_csv(out_path(cfg, "block_hv.csv"), {"block_id", "HV"}, rows);
  write_csv(out_path(cfg, "hv_flags.csv"), {"block_id", "flag"}, flags);

  ordered_json sec;
  sec["blocks"] = hv.hv.size();
  sec["imputed_delta"] = hv.imputed.size();
  sec["first_component_share"] = hv.first_component_share;
  sec["cdf_fallback"] = hv.cdf_fallback;
  return sec;
}

ordered_json stage_index(const PipelineConfig& cfg) {
  std::vector<CensusBlock> blocks = load_blocks(cfg);
  Polygon endemic = read_region_geojson(cfg.endemic_region, cfg.projection);
  std::map<std::string, double> ai =
      load_value_column(out_path(cfg, "block_ai.csv"), {"block_id", "AI"}, 0, 1, "block_ai");
  std::map<std::string, double> delta = load_value_column(
      out_path(cfg, "block_access.csv"),
      {"block_id", "t_hospital", "t_center", "t_post", "delta_r", "unreachable_flag"}, 0, 4,
      "block_access");
  std::map<std::string, double> eta = load_value_column(
      out_path(cfg, "block_eta.csv"), {"block_id", "eta_r"}, 0, 1, "block_eta");
  std::map<std::string, double> hv = load_value_column(
      out_path(cfg, "block_hv.csv"), {"block_id", "HV"}, 0, 1, "block_hv");
  std::set<std::string> uncovered = load_flagged_ids(out_path(cfg, "affinity_flags.csv"));
  std::set<std::string> imputed_delta = load_flagged_ids(out_path(cfg, "hv_flags.csv"));
  std::set<std::string> unreachable;
  {
    CsvTable t = read_csv(out_path(cfg, "block_access.csv"));
    for (const auto& r : t.rows)
      if (r[5] == "1") unreachable.insert(r[0]);
  }

  std::map<std::string, bool> is_endemic;
  std::map<std::string, DensityInput> dens;
  for (const CensusBlock& b : blocks) {
    is_endemic[b.id] = contains(endemic, centroid(b.geom));
    dens[b.id] = DensityInput{b.population, area(b.geom) / 1e6};
  }
  DensityResult density = density_scale(dens);
  std::set<std::string> zero_area(density.zero_area.begin(), density.zero_area.end());

  std::map<std::string, IndexInputs> included;
  for (const CensusBlock& b : blocks) {
    if (is_endemic[b.id] && !cfg.denominator_includes_endemic) continue;
    if (!hv.count(b.id) || !density.d.count(b.id) || !ai.count(b.id)) continue;
    included[b.id] = IndexInputs{hv[b.id], density.d[b.id], ai[b.id]};
  }
  std::map<std::string, double> chppi = chppi_index(included, cfg.alpha, cfg.beta);

  std::vector<std::vector<std::string>> rows;
  for (const CensusBlock& b : blocks) {
    auto get = [&](const std::map<std::string, double>& m) {
      auto it = m.find(b.id);
      return it == m.end() ? std::string() : format_double(it->second);
    };
    std::vector<std::string> f;
    if (is_endemic[b.id]) f.push_back("endemic");
    if (zero_area.count(b.id)) f.push_back("zero_area");
    if (!eta.count(b.id)) f.push_back("no_survey");
    if (!hv.count(b.id)) f.push_back("no_hv");
    if (uncovered.count(b.id)) f.push_back("uncovered");
    if (unreachable.count(b.id)) f.push_back("unreachable");
    if (imputed_delta.count(b.id)) f.push_back("imputed_delta");
    std::string flags;
    for (std::size_t i = 0; i < f.size(); ++i) flags += (i ? ";" : "") + f[i];
    rows.push_back({b.id, get(ai), get(delta), get(eta), get(hv), get(density.d), get(chppi),
                    flags});
  }
  write_csv(out_path(cfg, "block_indices.csv"),
            {"block_id", "AI", "delta", "eta", "HV", "d", "ChPPI", "flags"}, rows);

  ordered_json sec;
  sec["blocks"] = blocks.size();
  sec["included_blocks"] = chppi.size();
  sec["endemic_blocks"] = std::count_if(is_endemic.begin(), is_endemic.end(),
                                        [](const auto& kv) { return kv.second; });
  sec["zero_area_blocks"] = density.zero_area.size();
  sec["density_cdf_fallback"] = density.cdf_fallback;
  return sec;
}

ordered_json stage_select(const PipelineConfig& cfg) {
  std::vector<CensusBlock> blocks = load_blocks(cfg);
  Polygon endemic = read_region_geojson(cfg.endemic_region, cfg.projection);
  std::map<std::string, double> ai =
      load_value_column(out_path(cfg, "block_ai.csv"), {"block_id", "AI"}, 0, 1, "block_ai");

  std::vector<SelectionBlock> sel;
  for (const CensusBlock& b : blocks) {
    SelectionBlock s;
    s.block_id = b.id;
    s.locality_id = b.locality_id;
    s.province_id = b.province_id;
    s.ai = ai.count(b.id) ? ai[b.id] : 0.0;
    s.population = b.population;
    s.area_km2 = area(b.geom) / 1e6;
    s.in_endemic = contains(endemic, centroid(b.geom));
    sel.push_back(std::move(s));
  }
  SelectionParams params;
  params.min_block_pop = cfg.min_block_pop;
  params.min_density_km2 = cfg.min_density_km2;
  params.extreme_percentile = cfg.extreme_percentile;
  params.top_n = cfg.top_n;
  std::vector<LocalityReport> reports = select_localities(sel, params);

  std::vector<std::vector<std::string>> rows;
  std::size_t selected = 0;
  for (const LocalityReport& r : reports) {
    if (r.selected) ++selected;
    rows.push_back({r.locality_id, r.province_id, format_double(r.metric1),
                    r.has_extreme ? format_double(r.metric2) : "",
                    locality_type_name(r.type), r.selected ? "1" : "0"});
  }
  write_csv(out_path(cfg, "localities.csv"),
            {"locality_id", "province", "metric1", "metric2", "type", "selected"}, rows);

  ordered_json sec;
  sec["localities"] = reports.size();
  sec["selected"] = selected;
  return sec;
}

ordered_json stage_emit(const PipelineConfig& cfg) {
  ordered_json sec;
  for (const char* layer : {"AI", "HV", "ChPPI", "selection"}) {
    EmitOptions opt;
    opt.layer = layer;
    std::string path = emit_layer(cfg, opt);
    sec["files"].push_back(path.substr(path.find_last_of('/') + 1));
  }
  sec["features_per_layer"] = load_blocks(cfg).size();
  return sec;
}

// --------------------------------------------------------------- dispatch

struct StageDef {
  const char* name;
  std::vector<const char*> outputs;
  ordered_json (*fn)(const PipelineConfig&);
  std::vector<const char*> needs;  // outputs of earlier stages read by this one
};

const std::vector<StageDef>& stage_table() {
  static const std::vector<StageDef> table = {
      {"ingest", {"cdr_clean.csv"}, stage_ingest, {}},
      {"housing", {"antenna_housing.csv"}, stage_housing, {}},
      {"affinity",
       {"homes.csv", "antenna_tuples.csv", "block_ai.csv", "affinity_flags.csv"},
       stage_affinity,
       {"cdr_clean.csv", "antenna_housing.csv"}},
      {"access", {"block_access.csv"}, stage_access, {}},
      {"sei", {"household_scores.csv", "block_eta.csv"}, stage_sei, {}},
      {"vulnerability",
       {"block_hv.csv", "hv_flags.csv"},
       stage_vulnerability,
       {"block_access.csv", "block_eta.csv"}},
      {"index",
       {"block_indices.csv"},
       stage_index,
       {"block_ai.csv", "block_access.csv", "block_eta.csv", "block_hv.csv"}},
      {"select", {"localities.csv"}, stage_select, {"block_ai.csv"}},
      {"emit",
       {"ai.geojson", "hv.geojson", "chppi.geojson", "selection.geojson"},
       stage_emit,
       {"block_ai.csv", "block_hv.csv", "block_indices.csv", "localities.csv"}},
  };
  return table;
}

const StageDef& find_stage(const std::string& name) {
  for (const StageDef& s : stage_table())
    if (name == s.name) return s;
  raise(Errc::validation, "unknown stage: " + name);
}

std::string producer_of(const std::string& file) {
  for (const StageDef& s : stage_table())
    for (const char* out : s.outputs)
      if (file == out) return s.name;
  return "?";
}

bool outputs_present(const PipelineConfig& cfg, const StageDef& s) {
  for (const char* out : s.outputs)
    if (!file_exists(out_path(cfg, out))) return false;
  return true;
}

void run_one(const PipelineConfig& cfg, const StageDef& s, const RunOptions& opt) {
  for (const char* need : s.needs)
    if (!file_exists(out_path(cfg, need)))
      raise(Errc::validation, std::string("stage ") + s.name + " needs " + need +
                                  "; run stage " + producer_of(need) + " first");
  ordered_json section;
  try {
    section = s.fn(cfg);
  } catch (const Error& e) {
    std::string m = e.what();
    const std::string prefix = std::string(errc_name(e.code())) + ": ";
    if (m.rfind(prefix, 0) == 0) m = m.substr(prefix.size());
    raise(e.code(), std::string(s.name) + ": " + m);
  } catch (const std::exception& e) {
    raise(Errc::stage_failure, std::string(s.name) + ": " + e.what());
  }
  ordered_json doc = load_manifest(cfg);
  doc["stages"][s.name] = std::move(section);
  save_manifest(cfg, doc);
  if (!opt.quiet) std::fprintf(stderr, "[%s] done\n", s.name);
}

}  // namespace

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const StageDef& s : stage_table()) v.push_back(s.name);
    return v;
  }();
  return names;
}

void run_stage(const PipelineConfig& cfg, const std::string& stage, const RunOptions& opt) {
  check_manifest_compatible(cfg, opt.force);
  run_one(cfg, find_stage(stage), opt);
}

void run_pipeline(const PipelineConfig& cfg, const RunOptions& opt) {
  check_manifest_compatible(cfg, opt.force);
  for (const StageDef& s : stage_table()) {
    if (!opt.force && outputs_present(cfg, s)) {
      if (!opt.quiet) std::fprintf(stderr, "[%s] up to date\n", s.name);
      continue;
    }
    run_one(cfg, s, opt);
  }
}

std::string emit_layer(const PipelineConfig& cfg, const EmitOptions& opt) {
  std::vector<CensusBlock> blocks = load_blocks(cfg);
  std::string layer = opt.layer;
  std::transform(layer.begin(), layer.end(), layer.begin(),
                 [](unsigned char c) { return std::tolower(c); });

  std::vector<Feature> features;
  auto base_feature = [&](const CensusBlock& b) {
    Feature f;
    f.geom_lonlat = b.geom_lonlat;
    f.properties.emplace_back("block_id", PropertyValue::str(b.id));
    return f;
  };

  // population-weighted locality mean of a block-value map (display option)
  auto aggregate = [&](std::map<std::string, double>& values) {
    if (!opt.aggregate_localities) return;
    std::map<std::string, std::pair<double, double>> acc;  // locality -> (sum, weight)
    for (const CensusBlock& b : blocks) {
      auto it = values.find(b.id);
      if (it == values.end()) continue;
      const double w = std::max(b.population, 0.0);
      acc[b.locality_id].first += it->second * w;
      acc[b.locality_id].second += w;
    }
    std::map<std::string, double> out;
    for (const CensusBlock& b : blocks) {
      auto it = acc.find(b.locality_id);
      if (it != acc.end() && it->second.second > 0.0)
        out[b.id] = it->second.first / it->second.second;
    }
    values = std::move(out);
  };

  if (layer == "ai") {
    std::map<std::string, double> ai =
        load_value_column(out_path(cfg, "block_ai.csv"), {"block_id", "AI"}, 0, 1, "block_ai");
    std::set<std::string> uncovered = load_flagged_ids(out_path(cfg, "affinity_flags.csv"));
    aggregate(ai);
    for (const CensusBlock& b : blocks) {
      Feature f = base_feature(b);
      f.properties.emplace_back(
          "AI", PropertyValue::num(ai.count(b.id) ? ai[b.id]
                                                  : std::numeric_limits<double>::quiet_NaN()));
      f.properties.emplace_back("uncovered", PropertyValue::flag(uncovered.count(b.id) > 0));
      features.push_back(std::move(f));
    }
  } else if (layer == "hv") {
    std::map<std::string, double> hv = load_value_column(out_path(cfg, "block_hv.csv"),
                                                         {"block_id", "HV"}, 0, 1, "block_hv");
    std::set<std::string> imputed = load_flagged_ids(out_path(cfg, "hv_flags.csv"));
    aggregate(hv);
    for (const CensusBlock& b : blocks) {
      Feature f = base_feature(b);
      f.properties.emplace_back(
          "HV", PropertyValue::num(hv.count(b.id) ? hv[b.id]
                                                  : std::numeric_limits<double>::quiet_NaN()));
      f.properties.emplace_back("imputed_delta", PropertyValue::flag(imputed.count(b.id) > 0));
      features.push_back(std::move(f));
    }
  } else if (layer == "chppi") {
    CsvTable t = read_csv(out_path(cfg, "block_indices.csv"));
    expect_header(t, {"block_id", "AI", "delta", "eta", "HV", "d", "ChPPI", "flags"},
                  "block_indices");
    std::map<std::string, double> value;
    std::map<std::string, std::string> flags;
    for (const auto& r : t.rows) {
      if (!r[6].empty()) value[r[0]] = parse_double(r[6]);
      flags[r[0]] = r[7];
    }
    aggregate(value);
    for (const CensusBlock& b : blocks) {
      Feature f = base_feature(b);
      f.properties.emplace_back(
          "ChPPI", PropertyValue::num(value.count(b.id)
                                          ? value[b.id]
                                          : std::numeric_limits<double>::quiet_NaN()));
      f.properties.emplace_back("flags", PropertyValue::str(flags[b.id]));
      features.push_back(std::move(f));
    }
  } else if (layer == "selection") {
    CsvTable t = read_csv(out_path(cfg, "localities.csv"));
    expect_header(t, {"locality_id", "province", "metric1", "metric2", "type", "selected"},
                  "localities");
    std::map<std::string, std::pair<std::string, bool>> by_loc;  // type, selected
    for (const auto& r : t.rows) by_loc[r[0]] = {r[4], r[5] == "1"};
    for (const CensusBlock& b : blocks) {
      Feature f = base_feature(b);
      f.properties.emplace_back("locality_id", PropertyValue::str(b.locality_id));
      f.properties.emplace_back("province_id", PropertyValue::str(b.province_id));
      auto it = by_loc.find(b.locality_id);
      f.properties.emplace_back(
          "type", PropertyValue::str(it == by_loc.end() ? "none" : it->second.first));
      f.properties.emplace_back("selected", PropertyValue::flag(it != by_loc.end() &&
                                                                it->second.second));
      features.push_back(std::move(f));
    }
  } else {
    raise(Errc::validation, "unknown layer: " + opt.layer + " (use AI, HV, ChPPI, selection)");
  }

  std::string path = opt.out_path.empty() ? out_path(cfg, layer + ".geojson") : opt.out_path;
  write_geojson(path, features);
  return path;
}

}  // namespace chppi
