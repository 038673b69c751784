#include "vcnet/pipeline.hpp"
#include "vcnet/version.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

const char* stage_help(const std::string& name) {
  if (name == "ingest-check") return "validate the input tables and report the analysis cohort";
  if (name == "build-graphs") return "write yearly projection edge lists";
  if (name == "centrality") return "compute the nine centrality measures per year and side";
  if (name == "communities") return "detect and profile firm communities per year";
  if (name == "trajectories") return "build cohort funding trajectories on the shared grid";
  if (name == "cluster") return "cluster trajectories into funding regimes per sub-sector";
  if (name == "features") return "assemble the per-firm network feature table";
  if (name == "regress-logistic") return "logistic regime model with balanced resampling";
  if (name == "regress-scalar") return "linear terminal-funding model with best-subset search";
  if (name == "regress-functional") return "function-on-scalar regression over the grid";
  return "";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"vcnet: co-investment network and funding-trajectory pipeline"};
  app.set_version_flag("--version", std::string(vcnet::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> workers;
  bool plots = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed", seed, "override every stage seed");
  app.add_option("--workers", workers, "worker threads, 0 = hardware concurrency");
  app.add_flag("--plots", plots, "also write SVG plots");

  app.add_subcommand("synth", "generate a synthetic dataset with known ground truth");
  for (const auto& stage : vcnet::pipeline_stages()) app.add_subcommand(stage, stage_help(stage));
  app.add_subcommand("all", "run every stage in order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    vcnet::PipelineConfig cfg =
        config_path.empty() ? vcnet::default_config() : vcnet::load_config(config_path);
    vcnet::apply_env_overrides(cfg);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (workers) cfg.workers = *workers;
    if (plots) cfg.plots = true;
    if (seed) {
      cfg.synth.seed = *seed;
      cfg.kmeans.seed = *seed;
      cfg.resampling_seed = *seed;
      cfg.louvain_seed = *seed;
    }
    const vcnet::PipelineConfig defaults;
    if (cfg.out_dir != defaults.out_dir) {
      namespace fs = std::filesystem;
      if (cfg.deals_path == defaults.deals_path)
        cfg.deals_path = (fs::path(cfg.out_dir) / "synth" / "deals.csv").string();
      if (cfg.firms_path == defaults.firms_path)
        cfg.firms_path = (fs::path(cfg.out_dir) / "synth" / "firms.csv").string();
      if (cfg.investors_path == defaults.investors_path)
        cfg.investors_path = (fs::path(cfg.out_dir) / "synth" / "investors.csv").string();
    }

    vcnet::Pipeline pipeline(std::move(cfg));
    pipeline.run(app.get_subcommands().front()->get_name());
    return 0;
  } catch (const vcnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return vcnet::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
