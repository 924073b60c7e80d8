// Command line front end: one subcommand per pipeline stage plus the world
// generator, a single-layer emitter, and run-all.

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "chppi/config.hpp"
#include "chppi/error.hpp"
#include "chppi/runner.hpp"
#include "chppi/synth.hpp"

namespace {

struct StageCli {
  CLI::App* sub = nullptr;
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  double alpha = 0.0;
  double beta = 0.0;
  bool force = false;
  bool quiet = false;

  chppi::PipelineConfig load() const {
    chppi::PipelineConfig cfg = chppi::load_config(config);
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--threads")) cfg.threads = threads;
    if (sub->count("--alpha")) cfg.alpha = alpha;
    if (sub->count("--beta")) cfg.beta = beta;
    if (cfg.threads < 1) chppi::raise(chppi::Errc::validation, "threads must be >= 1");
    if (!(cfg.alpha >= 0.0 && cfg.beta >= 0.0))
      chppi::raise(chppi::Errc::validation, "alpha and beta must be non-negative");
    return cfg;
  }

  chppi::RunOptions run_options() const { return chppi::RunOptions{force, quiet}; }
};

StageCli* add_stage_options(CLI::App& app, std::vector<std::unique_ptr<StageCli>>& keep,
                            const std::string& name, const std::string& desc) {
  keep.push_back(std::make_unique<StageCli>());
  StageCli* s = keep.back().get();
  s->sub = app.add_subcommand(name, desc);
  s->sub->add_option("--config", s->config, "pipeline config file")
      ->required()
      ->check(CLI::ExistingFile);
  s->sub->add_option("--seed", s->seed, "override the config seed");
  s->sub->add_option("--threads", s->threads, "override the worker cap");
  s->sub->add_option("--alpha", s->alpha, "override the vulnerability exponent");
  s->sub->add_option("--beta", s->beta, "override the density exponent");
  s->sub->add_flag("--force", s->force, "recompute even when outputs exist");
  s->sub->add_flag("--quiet", s->quiet, "suppress progress lines");
  return s;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"endemic-affinity prevalence index pipeline"};
  app.require_subcommand(1);

  // world generator
  auto* synth = app.add_subcommand("synth", "write a synthetic input world");
  std::string synth_out = "world";
  chppi::SynthOptions sopt;
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();
  synth->add_option("--blocks", sopt.blocks, "census blocks")->capture_default_str();
  synth->add_option("--users", sopt.users, "phone users")->capture_default_str();
  synth->add_option("--providers", sopt.providers, "health providers")->capture_default_str();
  synth->add_option("--seed", sopt.seed, "generator seed")->capture_default_str();
  synth->add_option("--endemic-contact-rate", sopt.endemic_contact_rate,
                    "probability of a planted cross-region contact")
      ->capture_default_str();

  std::vector<std::unique_ptr<StageCli>> stage_clis;
  std::vector<std::pair<std::string, StageCli*>> stages;
  for (const std::string& name : chppi::pipeline_stages()) {
    if (name == "emit") continue;  // has its own richer subcommand below
    stages.emplace_back(name,
                        add_stage_options(app, stage_clis, name, "run the " + name + " stage"));
  }
  StageCli* run_all = add_stage_options(app, stage_clis, "run-all", "run every stage in order");
  StageCli* emit = add_stage_options(app, stage_clis, "emit", "write map layers");
  std::string emit_layer_name;
  bool emit_aggregate = false;
  std::string emit_out;
  emit->sub->add_option("--layer", emit_layer_name, "AI, HV, ChPPI or selection");
  emit->sub->add_flag("--aggregate", emit_aggregate,
                      "population-weighted locality means instead of block values");
  emit->sub->add_option("--out", emit_out, "output path for a single layer");

  CLI11_PARSE(app, argc, argv);

  if (*synth) {
    chppi::SynthSummary sum = chppi::generate_synthetic_world(synth_out, sopt);
    std::printf("wrote %s: %d blocks, %d antennas, %d users, %d cdr rows, %d households\n",
                synth_out.c_str(), sum.blocks, sum.antennas, sum.users, sum.cdr_rows,
                sum.households);
    return 0;
  }
  for (const auto& [name, cli] : stages)
    if (*cli->sub) {
      chppi::run_stage(cli->load(), name, cli->run_options());
      return 0;
    }
  if (*run_all->sub) {
    chppi::run_pipeline(run_all->load(), run_all->run_options());
    return 0;
  }
  if (*emit->sub) {
    chppi::PipelineConfig cfg = emit->load();
    if (emit_layer_name.empty() && !emit_aggregate && emit_out.empty()) {
      chppi::run_stage(cfg, "emit", emit->run_options());
      return 0;
    }
    chppi::EmitOptions eopt;
    if (!emit_layer_name.empty()) eopt.layer = emit_layer_name;
    eopt.aggregate_localities = emit_aggregate;
    eopt.out_path = emit_out;
    std::printf("%s\n", chppi::emit_layer(cfg, eopt).c_str());
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const chppi::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.code()) {
      case chppi::Errc::validation:
      case chppi::Errc::parse:
      case chppi::Errc::scale_too_small:
        return 2;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
