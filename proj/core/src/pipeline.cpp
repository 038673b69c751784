#include "vcnet/pipeline.hpp"

#include "vcnet/community.hpp"
#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"
#include "vcnet/rng.hpp"
#include "vcnet/svg.hpp"
#include "vcnet/version.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace vcnet {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[16];
  auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
  std::string digits(buf, res.ptr);
  return std::string(16 - digits.size(), '0') + digits;
}

double parse_double_field(const std::string& s, const char* what) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw Error(Errc::bad_field, std::string("bad number in ") + what + ": '" + s + "'");
  return v;
}

int parse_int_field(const std::string& s, const char* what) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(Errc::bad_field, std::string("bad integer in ") + what + ": '" + s + "'");
  return v;
}

const char* scale_name(TrajectoryScale s) {
  return s == TrajectoryScale::log1p_usd ? "log1p" : "raw";
}

TrajectoryScale parse_scale(const std::string& s) {
  if (s == "log1p") return TrajectoryScale::log1p_usd;
  if (s == "raw") return TrajectoryScale::raw_usd;
  throw Error(Errc::bad_config, "scale must be 'log1p' or 'raw', got '" + s + "'");
}

const char* distance_name(CorrelationDistance d) {
  return d == CorrelationDistance::one_minus_r ? "one_minus_r" : "one_minus_abs_r";
}

CorrelationDistance parse_distance(const std::string& s) {
  if (s == "one_minus_r") return CorrelationDistance::one_minus_r;
  if (s == "one_minus_abs_r") return CorrelationDistance::one_minus_abs_r;
  throw Error(Errc::bad_config, "unknown dedup_distance '" + s + "'");
}

const char* link_rule_name(FirmLinkRule r) {
  return r == FirmLinkRule::same_year ? "same_year" : "cross_year";
}

FirmLinkRule parse_link_rule(const std::string& s) {
  if (s == "same_year") return FirmLinkRule::same_year;
  if (s == "cross_year") return FirmLinkRule::cross_year;
  throw Error(Errc::bad_config, "unknown firm_links '" + s + "'");
}

const char* scope_name(InvestorScope s) {
  return s == InvestorScope::birth_year ? "birth_year" : "all_years";
}

InvestorScope parse_scope(const std::string& s) {
  if (s == "birth_year") return InvestorScope::birth_year;
  if (s == "all_years") return InvestorScope::all_years;
  throw Error(Errc::bad_config, "unknown investor_scope '" + s + "'");
}

const char* amount_policy_name(MissingAmountPolicy p) {
  return p == MissingAmountPolicy::error ? "error" : "flag";
}

MissingAmountPolicy parse_amount_policy(const std::string& s) {
  if (s == "error") return MissingAmountPolicy::error;
  if (s == "flag") return MissingAmountPolicy::flag;
  throw Error(Errc::bad_config, "unknown missing_amounts '" + s + "'");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw Error(Errc::bad_config, std::string("unknown key '") + it.key() + "' in " + where);
}

template <typename T>
void read_field(const json& obj, const char* key, T& into) {
  if (!obj.contains(key)) return;
  try {
    into = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::bad_config, std::string("bad value for '") + key + "'");
  }
}

void read_string_field(const json& obj, const char* key, std::string& into) {
  read_field<std::string>(obj, key, into);
}

void parallel_for(int workers, size_t count, const std::function<void(size_t)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (workers == 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto body = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const size_t spawn = std::min(static_cast<size_t>(workers), count);
  pool.reserve(spawn);
  for (size_t t = 0; t < spawn; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> intersect_in_order(const std::vector<std::string>& wanted,
                                            const std::vector<std::string>& available) {
  std::vector<std::string> out;
  for (const auto& name : wanted)
    if (std::find(available.begin(), available.end(), name) != available.end())
      out.push_back(name);
  return out;
}

struct FeatureFile {
  std::vector<FirmFeatureVector> rows;
  std::vector<std::string> columns; // feature keys in header order
};

struct CohortRow {
  std::string subsector;
  int birth_year = 0;
  double terminal = 0.0;
  size_t negative_offset_deals = 0;
};

} // namespace

PipelineConfig default_config() {
  PipelineConfig cfg;
  cfg.log1p_features = {"firm_voterank", "inv_degree_max", "firm_eigenvector"};
  cfg.logistic_features = {"inv_current_flow_betweenness_max", "inv_degree_max", "firm_closeness",
                           "firm_eigenvector", "firm_voterank"};
  cfg.synth.gamma = 0.5;
  cfg.synth.high_regime_fraction = 0.25;
  return cfg;
}

PipelineConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(Errc::bad_config, "config root must be an object");

  check_keys(root,
             {"deals", "firms", "investors", "out", "horizon", "grid_step", "scale", "kmeans",
              "dedup_k", "dedup_distance", "resampling", "log1p_features", "logistic_features",
              "scalar_features", "subset_max_size", "smoothing_bandwidth", "firm_links",
              "investor_scope", "component_cap", "missing_amounts", "louvain", "workers", "plots",
              "synth"},
             "config");

  PipelineConfig cfg = default_config();
  read_string_field(root, "deals", cfg.deals_path);
  read_string_field(root, "firms", cfg.firms_path);
  read_string_field(root, "investors", cfg.investors_path);
  read_string_field(root, "out", cfg.out_dir);
  read_field(root, "horizon", cfg.horizon);
  read_field(root, "grid_step", cfg.grid_step);
  if (root.contains("scale")) cfg.model_scale = parse_scale(root.at("scale").get<std::string>());
  if (root.contains("kmeans")) {
    const auto& km = root.at("kmeans");
    check_keys(km, {"k", "restarts", "seed", "tol", "max_iter"}, "kmeans");
    read_field(km, "k", cfg.kmeans.k);
    read_field(km, "restarts", cfg.kmeans.restarts);
    read_field(km, "seed", cfg.kmeans.seed);
    read_field(km, "tol", cfg.kmeans.tol);
    read_field(km, "max_iter", cfg.kmeans.max_iter);
  }
  read_field(root, "dedup_k", cfg.dedup_k);
  if (root.contains("dedup_distance"))
    cfg.dedup_distance = parse_distance(root.at("dedup_distance").get<std::string>());
  if (root.contains("resampling")) {
    const auto& rs = root.at("resampling");
    check_keys(rs, {"reps", "seed"}, "resampling");
    read_field(rs, "reps", cfg.resampling_reps);
    read_field(rs, "seed", cfg.resampling_seed);
  }
  read_field(root, "log1p_features", cfg.log1p_features);
  read_field(root, "logistic_features", cfg.logistic_features);
  read_field(root, "scalar_features", cfg.scalar_features);
  read_field(root, "subset_max_size", cfg.subset_max_size);
  if (root.contains("smoothing_bandwidth") && !root.at("smoothing_bandwidth").is_null()) {
    double bw = 0.0;
    read_field(root, "smoothing_bandwidth", bw);
    cfg.smoothing_bandwidth = bw;
  }
  if (root.contains("firm_links"))
    cfg.firm_link_rule = parse_link_rule(root.at("firm_links").get<std::string>());
  if (root.contains("investor_scope"))
    cfg.investor_scope = parse_scope(root.at("investor_scope").get<std::string>());
  read_field(root, "component_cap", cfg.component_cap);
  if (root.contains("missing_amounts"))
    cfg.missing_amounts = parse_amount_policy(root.at("missing_amounts").get<std::string>());
  if (root.contains("louvain")) {
    const auto& lv = root.at("louvain");
    check_keys(lv, {"seed", "resolution"}, "louvain");
    read_field(lv, "seed", cfg.louvain_seed);
    read_field(lv, "resolution", cfg.louvain_resolution);
  }
  read_field(root, "workers", cfg.workers);
  read_field(root, "plots", cfg.plots);
  if (root.contains("synth")) {
    const auto& sy = root.at("synth");
    check_keys(sy,
               {"seed", "investors", "firms", "first_year", "last_year", "subsectors",
                "rounds_mean", "round_join_prob", "amount_mu", "amount_sigma", "pa_strength",
                "gamma", "high_regime_fraction", "high_regime_ratio"},
               "synth");
    read_field(sy, "seed", cfg.synth.seed);
    read_field(sy, "investors", cfg.synth.n_investors);
    read_field(sy, "firms", cfg.synth.n_firms);
    read_field(sy, "first_year", cfg.synth.first_year);
    read_field(sy, "last_year", cfg.synth.last_year);
    read_field(sy, "subsectors", cfg.synth.n_subsectors);
    read_field(sy, "rounds_mean", cfg.synth.rounds_mean);
    read_field(sy, "round_join_prob", cfg.synth.round_join_prob);
    read_field(sy, "amount_mu", cfg.synth.amount_mu);
    read_field(sy, "amount_sigma", cfg.synth.amount_sigma);
    read_field(sy, "pa_strength", cfg.synth.pa_strength);
    read_field(sy, "gamma", cfg.synth.gamma);
    read_field(sy, "high_regime_fraction", cfg.synth.high_regime_fraction);
    read_field(sy, "high_regime_ratio", cfg.synth.high_regime_ratio);
  }

  if (cfg.horizon <= 0) throw Error(Errc::bad_config, "horizon must be positive");
  if (cfg.grid_step <= 0.0) throw Error(Errc::bad_config, "grid_step must be positive");
  if (cfg.kmeans.k != 2) throw Error(Errc::bad_config, "kmeans.k must be 2");
  if (cfg.dedup_k < 1) throw Error(Errc::bad_config, "dedup_k must be positive");
  if (cfg.resampling_reps < 1) throw Error(Errc::bad_config, "resampling reps must be positive");
  if (cfg.subset_max_size < 1) throw Error(Errc::bad_config, "subset_max_size must be positive");
  if (cfg.component_cap < 1) throw Error(Errc::bad_config, "component_cap must be positive");
  if (cfg.workers < 0) throw Error(Errc::bad_config, "workers must be non-negative");
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::missing_input, "cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_env_overrides(PipelineConfig& cfg) {
  if (const char* v = std::getenv("VCNET_DEALS")) cfg.deals_path = v;
  if (const char* v = std::getenv("VCNET_FIRMS")) cfg.firms_path = v;
  if (const char* v = std::getenv("VCNET_INVESTORS")) cfg.investors_path = v;
  if (const char* v = std::getenv("VCNET_OUT")) cfg.out_dir = v;
}

std::string canonical_config(const PipelineConfig& cfg) {
  json j;
  j["horizon"] = cfg.horizon;
  j["grid_step"] = cfg.grid_step;
  j["scale"] = scale_name(cfg.model_scale);
  j["kmeans"] = {{"k", cfg.kmeans.k},
                 {"restarts", cfg.kmeans.restarts},
                 {"seed", cfg.kmeans.seed},
                 {"tol", cfg.kmeans.tol},
                 {"max_iter", cfg.kmeans.max_iter}};
  j["dedup_k"] = cfg.dedup_k;
  j["dedup_distance"] = distance_name(cfg.dedup_distance);
  j["resampling"] = {{"reps", cfg.resampling_reps}, {"seed", cfg.resampling_seed}};
  j["log1p_features"] = cfg.log1p_features;
  j["logistic_features"] = cfg.logistic_features;
  j["scalar_features"] = cfg.scalar_features;
  j["subset_max_size"] = cfg.subset_max_size;
  if (cfg.smoothing_bandwidth)
    j["smoothing_bandwidth"] = *cfg.smoothing_bandwidth;
  else
    j["smoothing_bandwidth"] = nullptr;
  j["firm_links"] = link_rule_name(cfg.firm_link_rule);
  j["investor_scope"] = scope_name(cfg.investor_scope);
  j["component_cap"] = cfg.component_cap;
  j["missing_amounts"] = amount_policy_name(cfg.missing_amounts);
  j["louvain"] = {{"seed", cfg.louvain_seed}, {"resolution", cfg.louvain_resolution}};
  j["synth"] = {{"seed", cfg.synth.seed},
                {"investors", cfg.synth.n_investors},
                {"firms", cfg.synth.n_firms},
                {"first_year", cfg.synth.first_year},
                {"last_year", cfg.synth.last_year},
                {"subsectors", cfg.synth.n_subsectors},
                {"rounds_mean", cfg.synth.rounds_mean},
                {"round_join_prob", cfg.synth.round_join_prob},
                {"amount_mu", cfg.synth.amount_mu},
                {"amount_sigma", cfg.synth.amount_sigma},
                {"pa_strength", cfg.synth.pa_strength},
                {"gamma", cfg.synth.gamma},
                {"high_regime_fraction", cfg.synth.high_regime_fraction},
                {"high_regime_ratio", cfg.synth.high_regime_ratio}};
  return j.dump();
}

uint64_t config_hash(const PipelineConfig& cfg) { return fnv1a(canonical_config(cfg)); }

int exit_code_for(Errc c) noexcept {
  switch (c) {
    case Errc::bad_config:
    case Errc::too_many_features:
    case Errc::unknown_community:
      return 2;
    case Errc::no_convergence:
    case Errc::component_too_large:
    case Errc::singular_design:
    case Errc::internal:
      return 3;
    default:
      return 1;
  }
}

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> stages = {
      "ingest-check", "build-graphs",     "centrality",     "communities",
      "trajectories", "cluster",          "features",       "regress-logistic",
      "regress-scalar", "regress-functional",
  };
  return stages;
}

struct Pipeline::Impl {
  std::optional<Dataset> data;
  std::optional<TemporalBipartiteGraph> bipartite;
  std::optional<GraphCache> cache;
  std::map<std::string, std::string> new_artifacts; // rel path -> content hash

  const Dataset& dataset(const PipelineConfig& cfg) {
    if (!data) {
      IngestOptions opts;
      opts.missing_amounts = cfg.missing_amounts;
      data = load_dataset(cfg.deals_path, cfg.firms_path, cfg.investors_path, opts);
    }
    return *data;
  }

  const TemporalBipartiteGraph& graph(const PipelineConfig& cfg) {
    if (!bipartite) bipartite = TemporalBipartiteGraph::build(dataset(cfg));
    return *bipartite;
  }

  GraphCache& graphs(const PipelineConfig& cfg) {
    if (!cache) cache.emplace(graph(cfg), cfg.firm_link_rule);
    return *cache;
  }

  void write_artifact(const PipelineConfig& cfg, const std::string& rel,
                      const std::string& content) {
    const fs::path path = fs::path(cfg.out_dir) / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::missing_input, "cannot write artifact: " + path.string());
    out << content;
    out.close();
    if (!out) throw Error(Errc::missing_input, "short write on artifact: " + path.string());
    if (path.extension() != ".svg") new_artifacts[rel] = hex64(fnv1a(content));
  }

  void flush_manifest(const PipelineConfig& cfg) {
    const fs::path path = fs::path(cfg.out_dir) / "manifest.json";
    json manifest = json::object();
    if (fs::exists(path)) {
      std::ifstream in(path, std::ios::binary);
      std::ostringstream text;
      text << in.rdbuf();
      json parsed = json::parse(text.str(), nullptr, false);
      if (parsed.is_object()) manifest = std::move(parsed);
    }
    manifest["config_hash"] = hex64(config_hash(cfg));
    manifest["seeds"] = {{"synth", cfg.synth.seed},
                         {"kmeans", cfg.kmeans.seed},
                         {"resampling", cfg.resampling_seed},
                         {"louvain", cfg.louvain_seed}};
    manifest["versions"] = {{"vcnet", kVersion}, {"schema", kSchemaVersion}};
    json artifacts =
        manifest.contains("artifacts") && manifest["artifacts"].is_object()
            ? manifest["artifacts"]
            : json::object();
    for (const auto& [rel, hash] : new_artifacts) artifacts[rel] = hash;
    manifest["artifacts"] = std::move(artifacts);
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::missing_input, "cannot write manifest: " + path.string());
    out << manifest.dump(2) << "\n";
    new_artifacts.clear();
  }

  std::string artifact_path(const PipelineConfig& cfg, const std::string& rel) const {
    return (fs::path(cfg.out_dir) / rel).string();
  }

  std::ifstream open_artifact(const PipelineConfig& cfg, const std::string& rel,
                              const char* producer) const {
    const std::string path = artifact_path(cfg, rel);
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw Error(Errc::missing_input,
                  "missing " + path + "; run the '" + producer + "' stage first");
    return in;
  }

  FeatureFile read_features(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg, "stats/features.csv", "features");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next_record(fields) || fields.size() < 3)
      throw Error(Errc::bad_field, "features.csv has no header");
    FeatureFile file;
    file.columns.assign(fields.begin() + 3, fields.end());
    while (reader.next_record(fields)) {
      if (fields.size() != file.columns.size() + 3)
        throw Error(Errc::bad_field, "features.csv row width mismatch");
      FirmFeatureVector fv;
      fv.firm_id = fields[0];
      fv.birth_year = parse_int_field(fields[1], "features.csv birth_year");
      fv.first_funding_year = parse_int_field(fields[2], "features.csv first_funding_year");
      for (size_t j = 0; j < file.columns.size(); ++j) {
        std::optional<double> value;
        if (!fields[j + 3].empty())
          value = parse_double_field(fields[j + 3], "features.csv");
        fv.features.emplace(file.columns[j], value);
      }
      file.rows.push_back(std::move(fv));
    }
    return file;
  }

  std::map<std::string, CohortRow> read_cohort(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg, "fda/cohort.csv", "trajectories");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next_record(fields) || fields.size() != 5)
      throw Error(Errc::bad_field, "cohort.csv has an unexpected header");
    std::map<std::string, CohortRow> rows;
    while (reader.next_record(fields)) {
      if (fields.size() != 5) throw Error(Errc::bad_field, "cohort.csv row width mismatch");
      CohortRow row;
      row.subsector = fields[1];
      row.birth_year = parse_int_field(fields[2], "cohort.csv birth_year");
      row.terminal = parse_double_field(fields[3], "cohort.csv terminal_usd");
      row.negative_offset_deals =
          static_cast<size_t>(parse_int_field(fields[4], "cohort.csv negative_offset_deals"));
      rows.emplace(fields[0], std::move(row));
    }
    return rows;
  }

  TrajectoryGrid read_grid(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg, "fda/grid.csv", "trajectories");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next_record(fields) || fields.size() != 3)
      throw Error(Errc::bad_field, "grid.csv has an unexpected header");
    TrajectoryGrid grid;
    grid.scale = TrajectoryScale::raw_usd;
    bool first_firm = true;
    while (reader.next_record(fields)) {
      if (fields.size() != 3) throw Error(Errc::bad_field, "grid.csv row width mismatch");
      const double t = parse_double_field(fields[1], "grid.csv t");
      const double v = parse_double_field(fields[2], "grid.csv value");
      if (grid.firm_ids.empty() || grid.firm_ids.back() != fields[0]) {
        if (!grid.firm_ids.empty()) first_firm = false;
        grid.firm_ids.push_back(fields[0]);
        grid.rows.emplace_back();
      }
      if (first_firm) grid.grid.push_back(t);
      grid.rows.back().push_back(v);
    }
    for (const auto& row : grid.rows)
      if (row.size() != grid.grid.size())
        throw Error(Errc::bad_field, "grid.csv rows are ragged");
    return grid;
  }

  std::map<std::string, Regime> read_labels(const PipelineConfig& cfg) {
    auto in = open_artifact(cfg, "fda/labels.csv", "cluster");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next_record(fields) || fields.size() != 3)
      throw Error(Errc::bad_field, "labels.csv has an unexpected header");
    std::map<std::string, Regime> labels;
    while (reader.next_record(fields)) {
      if (fields.size() != 3) throw Error(Errc::bad_field, "labels.csv row width mismatch");
      if (fields[2] == "high")
        labels.emplace(fields[0], Regime::high);
      else if (fields[2] == "low")
        labels.emplace(fields[0], Regime::low);
      else
        throw Error(Errc::bad_field, "labels.csv regime must be high or low");
    }
    return labels;
  }
};

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {}
Pipeline::~Pipeline() = default;

void Pipeline::run(const std::string& subcommand) {
  if (subcommand == "all") {
    for (const auto& stage : pipeline_stages()) run(stage);
    return;
  }
  if (subcommand == "synth") return synth();
  if (subcommand == "ingest-check") return ingest_check();
  if (subcommand == "build-graphs") return build_graphs();
  if (subcommand == "centrality") return centrality();
  if (subcommand == "communities") return communities();
  if (subcommand == "trajectories") return trajectories();
  if (subcommand == "cluster") return cluster();
  if (subcommand == "features") return features();
  if (subcommand == "regress-logistic") return regress_logistic();
  if (subcommand == "regress-scalar") return regress_scalar();
  if (subcommand == "regress-functional") return regress_functional();
  throw Error(Errc::bad_config, "unknown subcommand: " + subcommand);
}

void Pipeline::synth() {
  const SynthResult result = generate(cfg_.synth);
  {
    std::ostringstream out;
    write_deals(out, result.data.deals);
    impl_->write_artifact(cfg_, "synth/deals.csv", out.str());
  }
  {
    std::vector<FirmRecord> firms;
    firms.reserve(result.data.firms.size());
    for (const auto& [id, rec] : result.data.firms) firms.push_back(rec);
    std::ostringstream out;
    write_firms(out, firms);
    impl_->write_artifact(cfg_, "synth/firms.csv", out.str());
  }
  {
    std::vector<InvestorRecord> investors;
    investors.reserve(result.data.investors.size());
    for (const auto& [id, rec] : result.data.investors) investors.push_back(rec);
    std::ostringstream out;
    write_investors(out, investors);
    impl_->write_artifact(cfg_, "synth/investors.csv", out.str());
  }
  {
    std::ostringstream out;
    write_ground_truth(out, result.truth);
    impl_->write_artifact(cfg_, "synth/ground_truth.csv", out.str());
  }
  impl_->flush_manifest(cfg_);
}

void Pipeline::ingest_check() {
  const Dataset& d = impl_->dataset(cfg_);
  const std::vector<Violation> violations = validate_dataset(d);
  const auto cohort = filter_analysis_cohort(d, cfg_.horizon);

  json report;
  report["deals"] = d.deals.size();
  report["firms"] = d.firms.size();
  report["investors"] = d.investors.size();
  report["cohort"] = cohort.size();
  report["violations"] = json::array();
  for (const auto& v : violations)
    report["violations"].push_back(
        {{"rule", v.rule}, {"entity_id", v.entity_id}, {"detail", v.detail}});
  impl_->write_artifact(cfg_, "ingest_report.json", report.dump(2) + "\n");
  impl_->flush_manifest(cfg_);

  if (!violations.empty())
    throw Error(Errc::bad_field, "dataset failed validation with " +
                                     std::to_string(violations.size()) +
                                     " violation(s); see ingest_report.json");
}

void Pipeline::build_graphs() {
  const TemporalBipartiteGraph& g = impl_->graph(cfg_);
  GraphCache& cache = impl_->graphs(cfg_);

  json summary;
  summary["investors"] = g.investor_ids().size();
  summary["firms"] = g.firm_ids().size();
  summary["deals"] = g.edges().size();
  summary["years"] = json::array();
  if (!g.empty()) {
    for (int year = g.min_year(); year <= g.max_year(); ++year) {
      const ProjectedGraph& firms = cache.firms_at(year);
      const ProjectedGraph& investors = cache.investors_at(year);
      {
        std::ostringstream out;
        write_edge_list(out, firms);
        impl_->write_artifact(cfg_, "graphs/firms_" + std::to_string(year) + ".csv", out.str());
      }
      {
        std::ostringstream out;
        write_edge_list(out, investors);
        impl_->write_artifact(cfg_, "graphs/investors_" + std::to_string(year) + ".csv",
                              out.str());
      }
      const auto deal_it = g.year_index().find(year);
      summary["years"].push_back(
          {{"year", year},
           {"deals", deal_it == g.year_index().end() ? size_t{0} : deal_it->second.size()},
           {"firm_nodes", firms.node_count()},
           {"firm_edges", firms.edge_count()},
           {"investor_nodes", investors.node_count()},
           {"investor_edges", investors.edge_count()}});
    }
  }
  impl_->write_artifact(cfg_, "graphs/summary.json", summary.dump(2) + "\n");
  impl_->flush_manifest(cfg_);
}

void Pipeline::centrality() {
  const TemporalBipartiteGraph& g = impl_->graph(cfg_);
  if (g.empty()) {
    impl_->flush_manifest(cfg_);
    return;
  }
  GraphCache& cache = impl_->graphs(cfg_);
  struct Task {
    const ProjectedGraph* graph;
    std::string rel;
  };
  std::vector<Task> tasks;
  for (int year = g.min_year(); year <= g.max_year(); ++year) {
    tasks.push_back({&cache.firms_at(year), "centrality/firms_" + std::to_string(year) + ".csv"});
    tasks.push_back(
        {&cache.investors_at(year), "centrality/investors_" + std::to_string(year) + ".csv"});
  }
  std::vector<std::string> outputs(tasks.size());
  parallel_for(cfg_.workers, tasks.size(), [&](size_t i) {
    std::vector<CentralityTable> tables;
    for (Measure m : all_measures) {
      if (m == Measure::eigenvector && tasks[i].graph->edge_count() == 0) continue;
      tables.push_back(
          compute_measure(*tasks[i].graph, m, static_cast<size_t>(cfg_.component_cap)));
    }
    std::ostringstream out;
    write_centrality_csv(out, tables);
    outputs[i] = out.str();
  });
  for (size_t i = 0; i < tasks.size(); ++i) impl_->write_artifact(cfg_, tasks[i].rel, outputs[i]);
  impl_->flush_manifest(cfg_);
}

void Pipeline::communities() {
  const TemporalBipartiteGraph& g = impl_->graph(cfg_);
  json summary;
  summary["years"] = json::array();
  if (!g.empty()) {
    GraphCache& cache = impl_->graphs(cfg_);
    Partition last;
    for (int year = g.min_year(); year <= g.max_year(); ++year) {
      const Partition part =
          louvain(cache.firms_at(year),
                  derive_seed(cfg_.louvain_seed, static_cast<uint64_t>(year - g.min_year())),
                  cfg_.louvain_resolution);
      std::ostringstream out;
      write_partition_csv(out, part);
      impl_->write_artifact(cfg_, "communities/firms_" + std::to_string(year) + ".csv", out.str());
      summary["years"].push_back({{"year", year},
                                  {"communities", part.community_count},
                                  {"modularity", part.modularity}});
      if (year == g.max_year()) last = part;
    }
    json profiles = json::array();
    const Dataset& d = impl_->dataset(cfg_);
    for (int community : rank_communities(last)) {
      const CommunityProfile p = composition_profile(last, community, d.firms);
      profiles.push_back({{"community", p.community},
                          {"size", p.size},
                          {"subsector_shares", p.subsector_shares},
                          {"status_shares", p.status_shares},
                          {"continent_shares", p.continent_shares},
                          {"unknown_subsector", p.unknown_subsector},
                          {"unknown_status", p.unknown_status},
                          {"unknown_continent", p.unknown_continent}});
    }
    impl_->write_artifact(cfg_, "communities/profiles.json", profiles.dump(2) + "\n");
  }
  impl_->write_artifact(cfg_, "communities/summary.json", summary.dump(2) + "\n");
  impl_->flush_manifest(cfg_);
}

void Pipeline::trajectories() {
  const Dataset& d = impl_->dataset(cfg_);
  const auto cohort_set = filter_analysis_cohort(d, cfg_.horizon);
  const std::vector<std::string> cohort(cohort_set.begin(), cohort_set.end());
  const auto trajs = build_cohort_trajectories(d, cohort, cfg_.horizon);
  const TrajectoryGrid grid =
      resample_to_grid(trajs, cfg_.grid_step, TrajectoryScale::raw_usd, cfg_.horizon);

  {
    std::ostringstream out;
    write_grid_csv(out, grid);
    impl_->write_artifact(cfg_, "fda/grid.csv", out.str());
  }
  {
    std::ostringstream out;
    write_csv_record(out, std::vector<std::string>{"firm_id", "subsector", "birth_year",
                                                   "terminal_usd", "negative_offset_deals"});
    for (size_t i = 0; i < trajs.size(); ++i) {
      const FirmRecord& firm = d.firms.at(trajs[i].firm_id);
      write_csv_record(out, std::vector<std::string>{
                                trajs[i].firm_id, firm.subsector.value_or(""),
                                std::to_string(*firm.birth_year),
                                format_double(grid.rows[i].back()),
                                std::to_string(trajs[i].negative_offset_deals)});
    }
    impl_->write_artifact(cfg_, "fda/cohort.csv", out.str());
  }
  if (cfg_.plots) {
    Plot plot;
    plot.title = "funding trajectories (log1p USD)";
    plot.x_label = "years since birth";
    plot.y_label = "log1p cumulative funding";
    const size_t stride = std::max<size_t>(1, grid.rows.size() / 48);
    for (size_t i = 0; i < grid.rows.size(); i += stride) {
      PlotSeries s;
      s.x = grid.grid;
      s.y.reserve(grid.grid.size());
      for (double v : grid.rows[i]) s.y.push_back(std::log1p(v));
      s.color = plot_color(i / stride);
      plot.series.push_back(std::move(s));
    }
    std::ostringstream out;
    write_svg(out, plot);
    impl_->write_artifact(cfg_, "fda/trajectories.svg", out.str());
  }
  impl_->flush_manifest(cfg_);
}

void Pipeline::cluster() {
  const TrajectoryGrid raw = impl_->read_grid(cfg_);
  const auto cohort = impl_->read_cohort(cfg_);

  std::map<std::string, TrajectoryGrid> by_subsector;
  for (size_t i = 0; i < raw.firm_ids.size(); ++i) {
    const auto it = cohort.find(raw.firm_ids[i]);
    if (it == cohort.end())
      throw Error(Errc::bad_field, "grid firm missing from cohort.csv: " + raw.firm_ids[i]);
    TrajectoryGrid& grid = by_subsector[it->second.subsector];
    if (grid.grid.empty()) {
      grid.grid = raw.grid;
      grid.scale = cfg_.model_scale;
    }
    grid.firm_ids.push_back(raw.firm_ids[i]);
    grid.rows.push_back(raw.rows[i]);
    if (cfg_.model_scale == TrajectoryScale::log1p_usd)
      for (double& v : grid.rows.back()) v = std::log1p(v);
  }

  const SubsectorClustering sc = cluster_by_subsector(by_subsector, cfg_.kmeans);
  std::vector<RegimeLabeling> labelings;
  labelings.reserve(sc.by_subsector.size());
  for (const auto& [name, labeling] : sc.by_subsector) labelings.push_back(labeling);

  {
    std::ostringstream out;
    write_labels_csv(out, labelings);
    impl_->write_artifact(cfg_, "fda/labels.csv", out.str());
  }
  {
    std::ostringstream out;
    write_centroids_csv(out, labelings, raw.grid);
    impl_->write_artifact(cfg_, "fda/centroids.csv", out.str());
  }
  {
    json summary;
    summary["subsectors"] = json::object();
    for (const auto& labeling : labelings)
      summary["subsectors"][labeling.subsector] = {
          {"n", labeling.labels.size()},
          {"cluster_sizes", labeling.cluster_sizes},
          {"inertia", labeling.inertia}};
    summary["skipped"] = sc.skipped;
    impl_->write_artifact(cfg_, "fda/cluster_summary.json", summary.dump(2) + "\n");
  }
  if (cfg_.plots) {
    Plot plot;
    plot.title = "regime centroids per sub-sector";
    plot.x_label = "years since birth";
    plot.y_label = cfg_.model_scale == TrajectoryScale::log1p_usd ? "log1p cumulative funding"
                                                                  : "cumulative funding (USD)";
    size_t color = 0;
    for (const auto& labeling : labelings) {
      for (size_t c = 0; c < labeling.centroids.size(); ++c) {
        PlotSeries s;
        s.label = labeling.subsector + (c == 0 ? ":high" : ":low");
        s.x = raw.grid;
        s.y = labeling.centroids[c];
        s.color = plot_color(color++);
        plot.series.push_back(std::move(s));
      }
    }
    std::ostringstream out;
    write_svg(out, plot);
    impl_->write_artifact(cfg_, "fda/centroids.svg", out.str());
  }
  impl_->flush_manifest(cfg_);
}

void Pipeline::features() {
  const Dataset& d = impl_->dataset(cfg_);
  const auto cohort_set = filter_analysis_cohort(d, cfg_.horizon);
  const std::vector<std::string> cohort(cohort_set.begin(), cohort_set.end());
  FeatureOptions opts;
  opts.investor_scope = cfg_.investor_scope;
  opts.component_cap = static_cast<size_t>(cfg_.component_cap);
  const auto rows = assemble_firm_features(d, cohort, impl_->graphs(cfg_), opts);
  std::ostringstream out;
  write_features_csv(out, rows);
  impl_->write_artifact(cfg_, "stats/features.csv", out.str());
  impl_->flush_manifest(cfg_);
}

void Pipeline::regress_logistic() {
  const FeatureFile file = impl_->read_features(cfg_);
  const auto labels = impl_->read_labels(cfg_);

  std::vector<FirmFeatureVector> labeled;
  size_t unlabeled = 0;
  for (const auto& fv : file.rows) {
    if (labels.count(fv.firm_id))
      labeled.push_back(fv);
    else
      ++unlabeled;
  }

  MatrixBuild mb = build_feature_matrix(labeled, cfg_.logistic_features);
  const FeatureMatrix xt = apply_transforms(
      mb.matrix, {intersect_in_order(cfg_.log1p_features, mb.matrix.columns), true});
  std::vector<int> y;
  y.reserve(xt.n());
  size_t highs = 0;
  for (const auto& id : xt.row_ids) {
    const int label = labels.at(id) == Regime::high ? 1 : 0;
    highs += static_cast<size_t>(label);
    y.push_back(label);
  }
  if (highs < 2 || xt.n() - highs < 2)
    throw Error(Errc::bad_field, "logistic stage needs at least two firms in each regime");

  const LogisticFit full = logistic_fit(xt, y);
  FeatureMatrix intercept_only;
  intercept_only.row_ids = xt.row_ids;
  intercept_only.values.assign(xt.n(), {});
  const LogisticFit reduced = logistic_fit(intercept_only, y);
  const double lr_p = logistic_lr_pvalue(full, reduced);
  const ResamplingSummary resampled =
      balanced_resampling(xt, y, cfg_.resampling_reps, cfg_.resampling_seed);

  {
    json fit;
    fit["terms"] = full.terms;
    fit["coef"] = full.coef;
    fit["se"] = full.se;
    fit["z"] = full.z;
    fit["p"] = full.p;
    fit["null_deviance"] = full.null_deviance;
    fit["residual_deviance"] = full.residual_deviance;
    fit["deviance_explained"] = full.deviance_explained;
    fit["lr_pvalue"] = lr_p;
    fit["iterations"] = full.iterations;
    fit["converged"] = full.converged;
    fit["separation"] = full.separation;
    fit["n"] = full.n;
    fit["high"] = highs;
    fit["excluded_missing"] = mb.excluded_rows;
    fit["excluded_unlabeled"] = unlabeled;
    fit["transforms"] = json::object();
    for (const auto& [name, t] : xt.transforms) fit["transforms"][name] = transform_name(t);
    impl_->write_artifact(cfg_, "stats/logistic_fit.json", fit.dump(2) + "\n");
  }
  {
    std::ostringstream out;
    write_resampling_csv(out, resampled);
    impl_->write_artifact(cfg_, "stats/resampling.csv", out.str());
  }
  {
    json summary;
    summary["terms"] = resampled.terms;
    summary["coef_mean"] = resampled.coef_mean;
    summary["coef_sd"] = resampled.coef_sd;
    summary["repetitions"] = resampled.records.size();
    summary["converged"] = resampled.converged_count;
    summary["rows_per_repetition"] = resampled.rows_per_repetition;
    impl_->write_artifact(cfg_, "stats/resampling_summary.json", summary.dump(2) + "\n");
  }
  impl_->flush_manifest(cfg_);
}

void Pipeline::regress_scalar() {
  const FeatureFile file = impl_->read_features(cfg_);
  const auto cohort = impl_->read_cohort(cfg_);

  const std::vector<std::string> columns =
      cfg_.scalar_features.empty() ? file.columns : cfg_.scalar_features;
  MatrixBuild mb = build_feature_matrix(file.rows, columns);
  if (mb.matrix.n() < 3)
    throw Error(Errc::bad_field, "too few complete feature rows for the scalar regression");
  const FeatureMatrix xt = apply_transforms(
      mb.matrix, {intersect_in_order(cfg_.log1p_features, mb.matrix.columns), true});

  std::vector<double> y_raw;
  y_raw.reserve(xt.n());
  for (const auto& id : xt.row_ids) {
    const auto it = cohort.find(id);
    if (it == cohort.end())
      throw Error(Errc::bad_field, "feature firm missing from cohort.csv: " + id);
    y_raw.push_back(it->second.terminal);
  }
  double mean = 0.0;
  std::vector<double> y(y_raw.size());
  for (size_t i = 0; i < y_raw.size(); ++i) {
    y[i] = std::log1p(y_raw[i]);
    mean += y[i];
  }
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (static_cast<double>(y.size()) - 1.0));
  if (sd == 0.0) throw Error(Errc::constant_column, "terminal funding is constant");
  for (double& v : y) v = (v - mean) / sd;

  const int k = std::min<int>(cfg_.dedup_k, static_cast<int>(xt.p()));
  const DedupResult dedup = correlation_dedup(xt, k, cfg_.dedup_distance);

  FeatureMatrix selected;
  selected.row_ids = xt.row_ids;
  selected.columns = dedup.selected;
  selected.values.assign(xt.n(), std::vector<double>(dedup.selected.size(), 0.0));
  for (size_t j = 0; j < dedup.selected.size(); ++j) {
    const int src = xt.column_index(dedup.selected[j]);
    for (size_t i = 0; i < xt.n(); ++i)
      selected.values[i][j] = xt.values[i][static_cast<size_t>(src)];
  }
  const LinearFit fit = ols_fit(selected, y);
  const auto subsets = best_subset(xt, y, std::min<int>(cfg_.subset_max_size, static_cast<int>(xt.p())));

  {
    json out;
    out["terms"] = fit.terms;
    out["coef"] = fit.coef;
    out["se"] = fit.se;
    out["t"] = fit.t;
    out["p"] = fit.p;
    out["r2"] = fit.r2;
    out["adj_r2"] = fit.adj_r2;
    out["residual_se"] = fit.residual_se;
    out["f_stat"] = fit.f_stat;
    out["f_pvalue"] = fit.f_pvalue;
    out["n"] = fit.n;
    out["df_residual"] = fit.df_residual;
    out["selected_features"] = dedup.selected;
    out["excluded_missing"] = mb.excluded_rows;
    out["outcome"] = {{"log1p_mean", mean}, {"log1p_sd", sd}};
    impl_->write_artifact(cfg_, "stats/linear_fit.json", out.dump(2) + "\n");
  }
  {
    json out;
    out["leaves"] = xt.columns;
    out["clusters"] = dedup.clusters;
    out["selected"] = dedup.selected;
    json merges = json::array();
    for (size_t i = xt.p(); i < dedup.tree.nodes.size(); ++i) {
      const auto& node = dedup.tree.nodes[i];
      merges.push_back({{"left", node.left}, {"right", node.right}, {"height", node.height}});
    }
    out["merges"] = merges;
    impl_->write_artifact(cfg_, "stats/dedup.json", out.dump(2) + "\n");
  }
  {
    std::ostringstream out;
    write_csv_record(out, std::vector<std::string>{"size", "rss", "features"});
    for (size_t s = 0; s < subsets.size(); ++s) {
      std::string joined;
      for (size_t j = 0; j < subsets[s].features.size(); ++j) {
        if (j) joined += ";";
        joined += subsets[s].features[j];
      }
      write_csv_record(out, std::vector<std::string>{std::to_string(s + 1),
                                                     format_double(subsets[s].rss), joined});
    }
    impl_->write_artifact(cfg_, "stats/best_subset.csv", out.str());
  }
  if (cfg_.plots && !dedup.selected.empty()) {
    Plot plot;
    plot.title = "outcome vs " + dedup.selected[0];
    plot.x_label = dedup.selected[0] + " (z)";
    plot.y_label = "log1p terminal funding (z)";
    PlotSeries s;
    s.points = true;
    const int src = xt.column_index(dedup.selected[0]);
    for (size_t i = 0; i < xt.n(); ++i) {
      s.x.push_back(xt.values[i][static_cast<size_t>(src)]);
      s.y.push_back(y[i]);
    }
    plot.series.push_back(std::move(s));
    std::ostringstream out;
    write_svg(out, plot);
    impl_->write_artifact(cfg_, "stats/scatter.svg", out.str());
  }
  impl_->flush_manifest(cfg_);
}

void Pipeline::regress_functional() {
  const TrajectoryGrid raw = impl_->read_grid(cfg_);
  const FeatureFile file = impl_->read_features(cfg_);

  MatrixBuild full = build_feature_matrix(file.rows, file.columns);
  if (full.matrix.n() < 3)
    throw Error(Errc::bad_field, "too few complete feature rows for the functional regression");
  const FeatureMatrix xt_full = apply_transforms(
      full.matrix, {intersect_in_order(cfg_.log1p_features, full.matrix.columns), true});
  const int k = std::min<int>(cfg_.dedup_k, static_cast<int>(xt_full.p()));
  const DedupResult dedup = correlation_dedup(xt_full, k, cfg_.dedup_distance);

  MatrixBuild mb = build_feature_matrix(file.rows, dedup.selected);
  const FeatureMatrix xt = apply_transforms(
      mb.matrix, {intersect_in_order(cfg_.log1p_features, mb.matrix.columns), true});

  const std::set<std::string> keep(xt.row_ids.begin(), xt.row_ids.end());
  TrajectoryGrid response;
  response.grid = raw.grid;
  response.scale = cfg_.model_scale;
  for (size_t i = 0; i < raw.firm_ids.size(); ++i) {
    if (!keep.count(raw.firm_ids[i])) continue;
    response.firm_ids.push_back(raw.firm_ids[i]);
    response.rows.push_back(raw.rows[i]);
    if (cfg_.model_scale == TrajectoryScale::log1p_usd)
      for (double& v : response.rows.back()) v = std::log1p(v);
  }

  const FunctionalFit fit = function_on_scalar_fit(response, xt, cfg_.smoothing_bandwidth);
  {
    std::ostringstream out;
    write_functional_csv(out, fit);
    impl_->write_artifact(cfg_, "stats/functional_fit.csv", out.str());
  }
  {
    json summary;
    summary["terms"] = fit.terms;
    summary["n"] = fit.n;
    summary["grid_points"] = fit.grid.size();
    summary["band_z"] = fit.band_z;
    summary["response_scale"] = scale_name(cfg_.model_scale);
    if (cfg_.smoothing_bandwidth)
      summary["smoothing_bandwidth"] = *cfg_.smoothing_bandwidth;
    else
      summary["smoothing_bandwidth"] = nullptr;
    summary["excluded_missing"] = mb.excluded_rows;
    impl_->write_artifact(cfg_, "stats/functional_summary.json", summary.dump(2) + "\n");
  }
  if (cfg_.plots && fit.terms.size() > 1) {
    Plot plot;
    plot.title = "function-on-scalar coefficient bands";
    plot.x_label = "years since birth";
    plot.y_label = "coefficient";
    for (size_t j = 1; j < fit.terms.size(); ++j) {
      PlotSeries s;
      s.label = fit.terms[j];
      s.x = fit.grid;
      s.y = fit.coef[j];
      s.color = plot_color(j - 1);
      plot.series.push_back(std::move(s));
      PlotBand band;
      band.x = fit.grid;
      band.color = plot_color(j - 1);
      for (size_t g = 0; g < fit.grid.size(); ++g) {
        band.lower.push_back(fit.coef[j][g] - fit.band_z * fit.se[j][g]);
        band.upper.push_back(fit.coef[j][g] + fit.band_z * fit.se[j][g]);
      }
      plot.bands.push_back(std::move(band));
    }
    std::ostringstream out;
    write_svg(out, plot);
    impl_->write_artifact(cfg_, "stats/functional_bands.svg", out.str());
  }
  impl_->flush_manifest(cfg_);
}

} // namespace vcnet
