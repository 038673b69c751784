#pragma once

#include "vcnet/centrality.hpp"
#include "vcnet/error.hpp"
#include "vcnet/fda.hpp"
#include "vcnet/graph.hpp"
#include "vcnet/ingest.hpp"
#include "vcnet/stats.hpp"
#include "vcnet/synth.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vcnet {

struct PipelineConfig {
  std::string deals_path = "out/synth/deals.csv";
  std::string firms_path = "out/synth/firms.csv";
  std::string investors_path = "out/synth/investors.csv";
  std::string out_dir = "out";

  int horizon = 10;
  double grid_step = 0.1;
  TrajectoryScale model_scale = TrajectoryScale::log1p_usd; // clustering + functional response
  KMeansParams kmeans;
  int dedup_k = 4;
  CorrelationDistance dedup_distance = CorrelationDistance::one_minus_r;
  int resampling_reps = 1000;
  uint64_t resampling_seed = 7;
  std::vector<std::string> log1p_features;    // set by default_config()
  std::vector<std::string> logistic_features; // set by default_config()
  std::vector<std::string> scalar_features;   // empty = every feature column
  int subset_max_size = 4;
  std::optional<double> smoothing_bandwidth;
  FirmLinkRule firm_link_rule = FirmLinkRule::same_year;
  InvestorScope investor_scope = InvestorScope::birth_year;
  int component_cap = 10000;
  MissingAmountPolicy missing_amounts = MissingAmountPolicy::error;
  uint64_t louvain_seed = 11;
  double louvain_resolution = 1.0;

  int workers = 0; // 0 = hardware concurrency
  bool plots = false;
  SynthConfig synth;
};

PipelineConfig default_config();

/// Parses the declarative JSON config; unknown keys raise Errc::bad_config.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);

/// VCNET_DEALS / VCNET_FIRMS / VCNET_INVESTORS / VCNET_OUT override paths.
void apply_env_overrides(PipelineConfig& cfg);

/// Canonical JSON of every analytic choice. Paths, workers, and the plot
/// flag are excluded: they move artifacts around but cannot change them.
std::string canonical_config(const PipelineConfig& cfg);
uint64_t config_hash(const PipelineConfig& cfg);

/// 1 data/validation, 2 configuration, 3 numerical failure.
int exit_code_for(Errc c) noexcept;

/// Dependency order `all` uses.
const std::vector<std::string>& pipeline_stages();

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);
  ~Pipeline();

  /// Runs one named subcommand, or every stage for "all". Throws Error.
  void run(const std::string& subcommand);

  void synth();
  void ingest_check();
  void build_graphs();
  void centrality();
  void communities();
  void trajectories();
  void cluster();
  void features();
  void regress_logistic();
  void regress_scalar();
  void regress_functional();

  const PipelineConfig& config() const noexcept { return cfg_; }

 private:
  struct Impl;
  PipelineConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

} // namespace vcnet
