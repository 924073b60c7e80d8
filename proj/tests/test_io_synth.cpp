#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "chppi/csv.hpp"
#include "chppi/error.hpp"
#include "chppi/geojson.hpp"
#include "chppi/geometry.hpp"
#include "chppi/runner.hpp"
#include "chppi/synth.hpp"
#include "support.hpp"

using namespace chppi;

TEST_SUITE("io_synth") {

TEST_CASE("doubles survive the trip through text") {
  const double vals[] = {0.0,     1.0,        -1.0,     0.1,         1.0 / 3.0, 1e-300,
                         1e300,   12345.6789, -2.5e-8,  0.3333333333333333,
                         5e-324,  1.7976931348623157e308};
  for (double v : vals) {
    std::string s = format_double(v);
    CHECK(parse_double(s) == v);  // bitwise
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "");
  CHECK(std::isinf(parse_double("inf")));
  CHECK(parse_double("-inf") < 0);
  CHECK(std::isnan(parse_double("")));
  CHECK_THROWS_AS(parse_double("12abc"), Error);
  CHECK_THROWS_AS(parse_double("nope"), Error);
}

TEST_CASE("csv plumbing round trips and rejects damage") {
  std::string dir = support::scratch_dir("csv");
  std::string path = dir + "/t.csv";
  write_csv(path, {"a", "b"}, {{"1", "x"}, {"2", ""}, {"", "z"}});
  CsvTable t = read_csv(path);
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[1][1] == "");
  CHECK(t.rows[2][0] == "");
  CHECK_NOTHROW(expect_header(t, {"a", "b"}, "t"));
  CHECK_THROWS_AS(expect_header(t, {"a", "c"}, "t"), Error);

  CHECK_THROWS_AS(read_csv(dir + "/missing.csv"), Error);
  write_file(dir + "/empty.csv", "");
  CHECK_THROWS_AS(read_csv(dir + "/empty.csv"), Error);
  write_file(dir + "/ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_csv(dir + "/ragged.csv"), Error);
  // blank lines and CR line ends are tolerated
  write_file(dir + "/crlf.csv", "a,b\r\n1,2\r\n\r\n3,4\r\n");
  CsvTable c = read_csv(dir + "/crlf.csv");
  CHECK(c.rows.size() == 2);
  CHECK(c.rows[1][1] == "4");
}

TEST_CASE("the map projection inverts exactly where the data lives") {
  Projection proj;
  proj.central_meridian_deg = -64.0;
  for (double lon : {-64.0, -63.2, -65.7}) {
    for (double lat : {-32.0, -31.4, -33.3}) {
      Point p = proj.project(lon, lat);
      auto [lon2, lat2] = proj.inverse(p);
      CHECK(lon2 == doctest::Approx(lon).epsilon(1e-12));
      CHECK(lat2 == doctest::Approx(lat).epsilon(1e-12));
    }
  }
  // one degree of latitude is about 111 km regardless of the meridian
  Point a = proj.project(-64.0, -32.0);
  Point b = proj.project(-64.0, -31.0);
  CHECK(std::abs(b.y - a.y) == doctest::Approx(111194.9).epsilon(1e-3));
}

TEST_CASE("block layers round trip through the geojson reader") {
  std::string dir = support::scratch_dir("geojson");
  Projection proj;
  proj.central_meridian_deg = -64.0;

  auto ring = [](double lon0, double lat0, double d) {
    Ring r;
    r.push_back({lon0, lat0});
    r.push_back({lon0 + d, lat0});
    r.push_back({lon0 + d, lat0 + d});
    r.push_back({lon0, lat0 + d});
    r.push_back({lon0, lat0});
    return r;
  };

  std::vector<Feature> fs;
  for (int i = 0; i < 3; ++i) {
    Feature f;
    f.geom_lonlat.exterior = ring(-64.0 + 0.01 * i, -32.0, 0.008);
    f.properties = {{"block_id", PropertyValue::str("B" + std::to_string(i))},
                    {"population", PropertyValue::num(100.0 * (i + 1))},
                    {"households", PropertyValue::num(30.0 + i)},
                    {"locality_id", PropertyValue::str("L1")},
                    {"province_id", PropertyValue::str("P1")}};
    fs.push_back(std::move(f));
  }
  write_geojson(dir + "/blocks.geojson", fs);

  auto blocks = read_blocks_geojson(dir + "/blocks.geojson", proj);
  REQUIRE(blocks.size() == 3);
  for (int i = 0; i < 3; ++i) {
    const CensusBlock& b = blocks[std::size_t(i)];
    CHECK(b.id == "B" + std::to_string(i));
    CHECK(b.population == 100.0 * (i + 1));
    CHECK(b.households == 30.0 + i);
    CHECK(b.locality_id == "L1");
    CHECK(b.province_id == "P1");
    Polygon direct = proj.project_polygon(fs[std::size_t(i)].geom_lonlat);
    CHECK(area(b.geom) == doctest::Approx(area(direct)).epsilon(1e-9));
    REQUIRE(b.geom_lonlat.exterior.size() == fs[std::size_t(i)].geom_lonlat.exterior.size());
    for (std::size_t k = 0; k < b.geom_lonlat.exterior.size(); ++k) {
      CHECK(b.geom_lonlat.exterior[k].x ==
            doctest::Approx(fs[std::size_t(i)].geom_lonlat.exterior[k].x).epsilon(1e-12));
      CHECK(b.geom_lonlat.exterior[k].y ==
            doctest::Approx(fs[std::size_t(i)].geom_lonlat.exterior[k].y).epsilon(1e-12));
    }
  }

  Feature region;
  region.geom_lonlat.exterior = ring(-64.0, -32.0, 0.05);
  region.properties = {{"name", PropertyValue::str("zone")}};
  write_geojson(dir + "/region.geojson", {region});
  Polygon lonlat;
  Polygon proj_region = read_region_geojson(dir + "/region.geojson", proj, &lonlat);
  CHECK(area(proj_region) > 0.0);
  CHECK(lonlat.exterior.size() == region.geom_lonlat.exterior.size());
}

TEST_CASE("configs load with resolved paths and strict validation") {
  std::string dir = support::scratch_dir("config");
  for (const char* name : {"ant.csv", "cdr.csv", "blocks.geojson", "boundary.geojson",
                           "endemic.geojson", "housing.csv", "labels.json", "nodes.csv",
                           "edges.csv", "households.csv", "schema.json"})
    write_file(dir + "/" + name, "placeholder\n");

  std::string body = R"({
  "inputs": {
    "antennas": "ant.csv",
    "cdr": "cdr.csv",
    "blocks": "blocks.geojson",
    "boundary": "boundary.geojson",
    "endemic_region": "endemic.geojson",
    "housing": "housing.csv",
    "providers": "providers.csv",
    "provider_labels": "labels.json",
    "street_nodes": "nodes.csv",
    "street_edges": "edges.csv",
    "households": "households.csv",
    "household_schema": "schema.json"
  },
  "output_dir": "out",
  "seed": 42,
  "alpha": 1.25,
  "beta": 0.5,
  "affinity": {"min_edge_calls": 2, "include_self": false, "evening_start_hour": 19},
  "access": {"speed_kmh": 4.5, "knn_candidates": 7},
  "autoencoder": {"epochs": 10, "batch": 32},
  "selection": {"top_n": 2}
})";
  write_file(dir + "/config.json", body);

  PipelineConfig cfg = load_config(dir + "/config.json");
  CHECK(cfg.seed == 42);
  CHECK(cfg.alpha == 1.25);
  CHECK(cfg.beta == 0.5);
  CHECK(cfg.min_edge_calls == 2);
  CHECK_FALSE(cfg.include_self);
  CHECK(cfg.night_window.evening_start_hour == 19);
  CHECK(cfg.night_window.morning_end_hour == 6);  // untouched default
  CHECK(cfg.speed_kmh == 4.5);
  CHECK(cfg.knn_candidates == 7);
  CHECK(cfg.ae_epochs == 10);
  CHECK(cfg.ae_batch == 32);
  CHECK(cfg.top_n == 2);
  CHECK(cfg.extreme_percentile == 0.95);
  CHECK(cfg.config_hash != 0);
  CHECK(cfg.antennas == dir + "/ant.csv");       // resolved against the config dir
  CHECK(cfg.output_dir == dir + "/out");

  // providers.csv intentionally absent: validation must name it
  try {
    validate_config(cfg);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::validation);
    CHECK(std::string(e.what()).find("providers") != std::string::npos);
  }
  write_file(dir + "/providers.csv", "placeholder\n");
  CHECK_NOTHROW(validate_config(cfg));

  write_file(dir + "/broken.json", "{not json");
  CHECK_THROWS_AS(load_config(dir + "/broken.json"), Error);
  std::string bad = body;
  bad.replace(bad.find("\"alpha\": 1.25"), 13, "\"alpha\": -1.0");
  write_file(dir + "/bad.json", bad);
  CHECK_THROWS_AS(load_config(dir + "/bad.json"), Error);
}

TEST_CASE("the world generator is deterministic per seed") {
  SynthOptions opt;
  opt.blocks = 48;
  opt.users = 250;
  opt.providers = 6;
  opt.seed = 12;
  std::string d1 = support::scratch_dir("world_a");
  std::string d2 = support::scratch_dir("world_b");
  SynthSummary s1 = generate_synthetic_world(d1, opt);
  SynthSummary s2 = generate_synthetic_world(d2, opt);
  CHECK(s1.blocks == 48);
  CHECK(s1.users == 250);
  CHECK(s1.cdr_rows == s2.cdr_rows);
  CHECK(s1.households == s2.households);
  auto c1 = support::dir_contents(d1);
  auto c2 = support::dir_contents(d2);
  REQUIRE(c1.size() == c2.size());
  for (const auto& [rel, bytes] : c1) {
    REQUIRE(c2.count(rel) == 1);
    bool same = bytes == c2.at(rel);
    CHECK_MESSAGE(same, rel, " differs between identical generations");
  }

  std::string d3 = support::scratch_dir("world_c");
  SynthOptions other = opt;
  other.seed = 13;
  generate_synthetic_world(d3, other);
  CHECK(support::dir_contents(d3) != c1);
}

TEST_CASE("undersized worlds are refused") {
  std::string dir = support::scratch_dir("tiny");
  SynthOptions opt;
  opt.blocks = 5;
  CHECK_THROWS_AS(generate_synthetic_world(dir + "/w1", opt), Error);
  opt.blocks = 48;
  opt.users = 4;
  CHECK_THROWS_AS(generate_synthetic_world(dir + "/w2", opt), Error);
  opt.users = 250;
  opt.providers = 2;
  CHECK_THROWS_AS(generate_synthetic_world(dir + "/w3", opt), Error);
  opt.providers = 6;
  opt.blocks = 30;  // endemic strip would hold under 4 antenna tiles
  CHECK_THROWS_AS(generate_synthetic_world(dir + "/w4", opt), Error);
}

TEST_CASE("without cross-region calls the affinity stays in the endemic strip") {
  std::string dir = support::scratch_dir("no_contact");
  SynthOptions opt;
  opt.blocks = 48;
  opt.users = 300;
  opt.providers = 6;
  opt.endemic_contact_rate = 0.0;
  opt.seed = 8;
  generate_synthetic_world(dir + "/world", opt);

  PipelineConfig cfg = load_config(dir + "/world/config.json");
  RunOptions quiet;
  quiet.quiet = true;
  run_stage(cfg, "ingest", quiet);
  run_stage(cfg, "housing", quiet);
  run_stage(cfg, "affinity", quiet);

  std::map<std::string, double> ai;
  {
    CsvTable t = read_csv(cfg.output_dir + "/block_ai.csv");
    for (const auto& r : t.rows) ai[r[0]] = parse_double(r[1]);
  }
  CsvTable planted = read_csv(dir + "/world/ground_truth/planted_blocks.csv");
  expect_header(planted, {"block_id", "planted"}, "planted_blocks");
  REQUIRE_FALSE(planted.rows.empty());
  for (const auto& r : planted.rows) {
    REQUIRE(ai.count(r[0]) == 1);
    CHECK(ai.at(r[0]) == 0.0);  // exactly zero, not merely small
  }
  double total = 0.0;
  for (const auto& [id, v] : ai) total += v;
  CHECK(total > 0.0);  // the endemic strip itself carries mass
}

TEST_CASE("the command line drives the full pipeline") {
  std::string dir = support::scratch_dir("cli");
  std::string world = dir + "/world";
  REQUIRE(support::run_cli("synth --out " + world +
                           " --blocks 48 --users 400 --providers 8 --seed 3") == 0);
  std::string config = world + "/config.json";
  REQUIRE(file_exists(config));
  PipelineConfig cfg = load_config(config);

  REQUIRE(support::run_cli("run-all --config " + config + " --quiet") == 0);
  for (const char* out : {"cdr_clean.csv", "antenna_housing.csv", "block_ai.csv",
                          "block_access.csv", "block_eta.csv", "block_hv.csv",
                          "block_indices.csv", "localities.csv", "manifest.json",
                          "ai.geojson", "hv.geojson", "chppi.geojson", "selection.geojson"})
    CHECK(file_exists(cfg.output_dir + "/" + std::string(out)));

  // a wiped output directory regenerates byte for byte
  auto snapshot = support::dir_contents(cfg.output_dir);
  std::filesystem::remove_all(cfg.output_dir);
  REQUIRE(support::run_cli("run-all --config " + config + " --quiet") == 0);
  auto again = support::dir_contents(cfg.output_dir);
  REQUIRE(again.size() == snapshot.size());
  for (const auto& [rel, bytes] : snapshot) {
    bool same = again.count(rel) == 1 && again.at(rel) == bytes;
    CHECK_MESSAGE(same, rel, " differs after a clean rerun");
  }

  // aggregated emit: every block carries its locality's population-weighted mean
  {
    EmitOptions eopt;
    eopt.layer = "ChPPI";
    eopt.aggregate_localities = true;
    eopt.out_path = dir + "/agg.geojson";
    emit_layer(cfg, eopt);

    std::map<std::string, double> chppi;
    CsvTable t = read_csv(cfg.output_dir + "/block_indices.csv");
    for (const auto& r : t.rows)
      if (!r[6].empty()) chppi[r[0]] = parse_double(r[6]);
    auto blocks = read_blocks_geojson(cfg.blocks, cfg.projection);
    std::map<std::string, std::pair<double, double>> acc;
    std::map<std::string, std::string> loc_of;
    for (const auto& b : blocks) {
      loc_of[b.id] = b.locality_id;
      auto it = chppi.find(b.id);
      if (it == chppi.end()) continue;
      acc[b.locality_id].first += it->second * b.population;
      acc[b.locality_id].second += b.population;
    }

    auto doc = nlohmann::json::parse(support::slurp(dir + "/agg.geojson"));
    REQUIRE(doc.at("features").size() == blocks.size());
    for (const auto& f : doc.at("features")) {
      std::string id = f.at("properties").at("block_id").get<std::string>();
      const auto& val = f.at("properties").at("ChPPI");
      auto it = acc.find(loc_of.at(id));
      if (it == acc.end() || it->second.second <= 0.0) {
        CHECK(val.is_null());
      } else {
        REQUIRE(val.is_number());
        double want = it->second.first / it->second.second;
        CHECK(val.get<double>() == doctest::Approx(want).epsilon(1e-9));
      }
    }
  }

  // reusing the directory under different settings is refused without force
  CHECK(support::run_cli("index --config " + config + " --alpha 1.5 --quiet") == 2);
  CHECK(support::run_cli("index --config " + config + " --alpha 1.5 --quiet --force") == 0);

  CHECK(support::run_cli("emit --config " + config + " --layer bogus") == 2);

  // an input degraded to a single housing profile fails as a stage error
  write_csv(cfg.housing, {"block_id", "floor", "roof", "ceiling", "households"},
            {{"B00000", "cement", "metal", "no", "12"},
             {"B00001", "cement", "metal", "no", "9"}});
  CHECK(support::run_cli("housing --config " + config + " --quiet --force") == 3);

  // a missing input file is a plain validation failure
  std::filesystem::remove(cfg.cdr);
  CHECK(support::run_cli("ingest --config " + config + " --quiet --force") == 2);
}

TEST_CASE("stages demand their prerequisites by name") {
  std::string dir = support::scratch_dir("prereq");
  SynthOptions opt;
  opt.blocks = 48;
  opt.users = 120;
  opt.providers = 6;
  opt.seed = 21;
  generate_synthetic_world(dir + "/world", opt);
  PipelineConfig cfg = load_config(dir + "/world/config.json");
  RunOptions quiet;
  quiet.quiet = true;
  try {
    run_stage(cfg, "affinity", quiet);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::validation);
    std::string m = e.what();
    CHECK(m.find("ingest") != std::string::npos);
  }
  CHECK_THROWS_AS(run_stage(cfg, "no_such_stage", quiet), Error);
}

}  // TEST_SUITE
