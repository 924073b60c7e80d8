#include "chppi/config.hpp"

#include <filesystem>
#include <nlohmann/json.hpp>

#include "chppi/csv.hpp"
#include "chppi/error.hpp"
#include "chppi/rng.hpp"

namespace chppi {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return fp.lexically_normal().string();
  return (base / fp).lexically_normal().string();
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::string raw = read_file(path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::validation, path + ": " + e.what());
  }

  PipelineConfig cfg;
  cfg.source_path = path;
  cfg.config_hash = fnv1a64(raw);
  std::filesystem::path base = std::filesystem::path(path).parent_path();

  try {
    const auto& in = doc.at("inputs");
    cfg.antennas = resolve(base, in.at("antennas").get<std::string>());
    cfg.cdr = resolve(base, in.at("cdr").get<std::string>());
    cfg.blocks = resolve(base, in.at("blocks").get<std::string>());
    cfg.boundary = resolve(base, in.at("boundary").get<std::string>());
    cfg.endemic_region = resolve(base, in.at("endemic_region").get<std::string>());
    cfg.housing = resolve(base, in.at("housing").get<std::string>());
    cfg.providers = resolve(base, in.at("providers").get<std::string>());
    cfg.provider_labels = resolve(base, in.at("provider_labels").get<std::string>());
    cfg.street_nodes = resolve(base, in.at("street_nodes").get<std::string>());
    cfg.street_edges = resolve(base, in.at("street_edges").get<std::string>());
    cfg.households = resolve(base, in.at("households").get<std::string>());
    cfg.household_schema = resolve(base, in.at("household_schema").get<std::string>());
    cfg.output_dir = resolve(base, doc.at("output_dir").get<std::string>());

    if (doc.contains("projection")) {
      const auto& pj = doc["projection"];
      cfg.projection.type = pj.value("type", cfg.projection.type);
      cfg.projection.central_meridian_deg =
          pj.value("central_meridian_deg", cfg.projection.central_meridian_deg);
      cfg.projection.earth_radius_m = pj.value("earth_radius_m", cfg.projection.earth_radius_m);
    }
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.alpha = doc.value("alpha", cfg.alpha);
    cfg.beta = doc.value("beta", cfg.beta);
    if (doc.contains("affinity")) {
      const auto& a = doc["affinity"];
      cfg.min_edge_calls = a.value("min_edge_calls", cfg.min_edge_calls);
      cfg.include_self = a.value("include_self", cfg.include_self);
      cfg.night_window.evening_start_hour =
          a.value("evening_start_hour", cfg.night_window.evening_start_hour);
      cfg.night_window.morning_end_hour =
          a.value("morning_end_hour", cfg.night_window.morning_end_hour);
    }
    if (doc.contains("access")) {
      const auto& a = doc["access"];
      cfg.speed_kmh = a.value("speed_kmh", cfg.speed_kmh);
      cfg.knn_candidates = a.value("knn_candidates", cfg.knn_candidates);
      cfg.sample_points = a.value("sample_points", cfg.sample_points);
    }
    if (doc.contains("autoencoder")) {
      const auto& a = doc["autoencoder"];
      cfg.ae_d1 = a.value("d1", cfg.ae_d1);
      cfg.ae_dropout = a.value("dropout", cfg.ae_dropout);
      cfg.ae_epochs = a.value("epochs", cfg.ae_epochs);
      cfg.ae_batch = a.value("batch", cfg.ae_batch);
      cfg.ae_learning_rate = a.value("learning_rate", cfg.ae_learning_rate);
    }
    if (doc.contains("index"))
      cfg.denominator_includes_endemic =
          doc["index"].value("denominator_includes_endemic", cfg.denominator_includes_endemic);
    if (doc.contains("selection")) {
      const auto& s = doc["selection"];
      cfg.min_block_pop = s.value("min_block_pop", cfg.min_block_pop);
      cfg.min_density_km2 = s.value("min_density_km2", cfg.min_density_km2);
      cfg.extreme_percentile = s.value("extreme_percentile", cfg.extreme_percentile);
      cfg.top_n = s.value("top_n", cfg.top_n);
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::validation, path + ": " + e.what());
  }

  if (cfg.threads < 1) raise(Errc::validation, "threads must be >= 1");
  if (!(cfg.alpha >= 0.0 && cfg.beta >= 0.0))
    raise(Errc::validation, "alpha and beta must be non-negative");
  if (!(cfg.speed_kmh > 0.0)) raise(Errc::validation, "speed_kmh must be positive");
  if (cfg.knn_candidates < 1) raise(Errc::validation, "knn_candidates must be >= 1");
  if (cfg.sample_points < 1) raise(Errc::validation, "sample_points must be >= 1");
  if (!(cfg.ae_dropout >= 0.0 && cfg.ae_dropout < 1.0))
    raise(Errc::validation, "autoencoder dropout must lie in [0,1)");
  if (cfg.ae_epochs < 1 || cfg.ae_batch < 1)
    raise(Errc::validation, "autoencoder epochs and batch must be >= 1");
  if (!(cfg.extreme_percentile > 0.0 && cfg.extreme_percentile < 1.0))
    raise(Errc::validation, "extreme_percentile must lie in (0,1)");
  if (cfg.top_n < 1) raise(Errc::validation, "top_n must be >= 1");
  if (!(cfg.min_block_pop >= 0.0) || !(cfg.min_density_km2 >= 0.0))
    raise(Errc::validation, "selection thresholds must be non-negative");
  if (cfg.night_window.evening_start_hour < 0 || cfg.night_window.evening_start_hour > 23 ||
      cfg.night_window.morning_end_hour < 0 || cfg.night_window.morning_end_hour > 23)
    raise(Errc::validation, "night window hours must lie in 0..23");
  return cfg;
}

void validate_config(const PipelineConfig& cfg) {
  const std::pair<const char*, const std::string*> paths[] = {
      {"antennas", &cfg.antennas},
      {"cdr", &cfg.cdr},
      {"blocks", &cfg.blocks},
      {"boundary", &cfg.boundary},
      {"endemic_region", &cfg.endemic_region},
      {"housing", &cfg.housing},
      {"providers", &cfg.providers},
      {"provider_labels", &cfg.provider_labels},
      {"street_nodes", &cfg.street_nodes},
      {"street_edges", &cfg.street_edges},
      {"households", &cfg.households},
      {"household_schema", &cfg.household_schema},
  };
  for (const auto& [name, path] : paths) {
    if (path->empty())
      raise(Errc::validation, std::string("config is missing the ") + name + " input path");
    if (!file_exists(*path))
      raise(Errc::validation, std::string(name) + " file not found: " + *path);
  }
  if (cfg.output_dir.empty()) raise(Errc::validation, "config is missing output_dir");
}

std::string config_to_json(const PipelineConfig& cfg) {
  ordered_json doc;
  ordered_json in;
  in["antennas"] = cfg.antennas;
  in["cdr"] = cfg.cdr;
  in["blocks"] = cfg.blocks;
  in["boundary"] = cfg.boundary;
  in["endemic_region"] = cfg.endemic_region;
  in["housing"] = cfg.housing;
  in["providers"] = cfg.providers;
  in["provider_labels"] = cfg.provider_labels;
  in["street_nodes"] = cfg.street_nodes;
  in["street_edges"] = cfg.street_edges;
  in["households"] = cfg.households;
  in["household_schema"] = cfg.household_schema;
  doc["inputs"] = std::move(in);
  doc["output_dir"] = cfg.output_dir;
  doc["projection"] = {{"type", cfg.projection.type},
                       {"central_meridian_deg", cfg.projection.central_meridian_deg},
                       {"earth_radius_m", cfg.projection.earth_radius_m}};
  doc["seed"] = cfg.seed;
  doc["threads"] = cfg.threads;
  doc["alpha"] = cfg.alpha;
  doc["beta"] = cfg.beta;
  doc["affinity"] = {{"min_edge_calls", cfg.min_edge_calls},
                     {"include_self", cfg.include_self},
                     {"evening_start_hour", cfg.night_window.evening_start_hour},
                     {"morning_end_hour", cfg.night_window.morning_end_hour}};
  doc["access"] = {{"speed_kmh", cfg.speed_kmh},
                   {"knn_candidates", cfg.knn_candidates},
                   {"sample_points", cfg.sample_points}};
  doc["autoencoder"] = {{"d1", cfg.ae_d1},
                        {"dropout", cfg.ae_dropout},
                        {"epochs", cfg.ae_epochs},
                        {"batch", cfg.ae_batch},
                        {"learning_rate", cfg.ae_learning_rate}};
  doc["index"] = {{"denominator_includes_endemic", cfg.denominator_includes_endemic}};
  doc["selection"] = {{"min_block_pop", cfg.min_block_pop},
                      {"min_density_km2", cfg.min_density_km2},
                      {"extreme_percentile", cfg.extreme_percentile},
                      {"top_n", cfg.top_n}};
  return doc.dump(2) + "\n";
}

}  // namespace chppi
