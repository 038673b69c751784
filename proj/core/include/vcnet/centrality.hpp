#pragma once

#include "vcnet/graph.hpp"
#include "vcnet/records.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vcnet {

enum class Measure {
  degree,
  betweenness,
  eigenvector,
  voterank,
  pagerank,
  closeness,
  subgraph,
  avg_neighbor_degree,
  current_flow_betweenness,
};

inline constexpr std::array<Measure, 9> all_measures = {
    Measure::degree,       Measure::betweenness, Measure::eigenvector,
    Measure::voterank,     Measure::pagerank,    Measure::closeness,
    Measure::subgraph,     Measure::avg_neighbor_degree,
    Measure::current_flow_betweenness,
};

const char* measure_name(Measure m) noexcept;
std::optional<Measure> parse_measure(std::string_view name);

struct CentralityTable {
  Side side = Side::firms;
  int year = 0;
  Measure measure = Measure::degree;
  std::map<std::string, double> values; // node_id -> value, every node present
};

/// All measures ignore edge weights (simple unweighted skeleton).

/// degree / (n - 1); 0 when n == 1.
CentralityTable degree_centrality(const ProjectedGraph& g);

/// Brandes shortest-path betweenness over the whole graph, scaled by
/// (n - 1)(n - 2) / 2 pairs; 0 everywhere when n < 3.
CentralityTable betweenness_centrality(const ProjectedGraph& g);

/// Principal adjacency eigenvector, computed per connected component by power
/// iteration on A + I (stays non-negative, sidesteps bipartite oscillation).
/// Isolated nodes get 0; the assembled vector has unit Euclidean norm.
/// Throws Errc::no_convergence when the graph has no edges or an iteration
/// budget runs out.
CentralityTable eigenvector_centrality(const ProjectedGraph& g, double tol = 1e-10,
                                       int max_iter = 1000);

/// Voting rounds: every node votes its ability for each neighbor; the best
/// voted unelected node takes the next rank, its ability drops to zero and
/// each neighbor loses 1/<k> ability (floored at 0, <k> fixed up front).
/// Stops when no positive votes remain; unelected nodes share rank m + 1.
/// Ties elect the lexicographically smallest id. Value = rank.
CentralityTable voterank(const ProjectedGraph& g);

/// Damped random walk on the undirected graph; isolated nodes are dangling
/// and their mass is spread uniformly. Values sum to 1.
CentralityTable pagerank(const ProjectedGraph& g, double damping = 0.85, double tol = 1e-12,
                         int max_iter = 1000);

/// Wasserman-Faust component-scaled closeness: (r / (n - 1)) * (r / sum d)
/// with r reachable peers; 0 for isolated nodes.
CentralityTable closeness_centrality(const ProjectedGraph& g);

/// SC_v = sum_j (u_jv)^2 exp(lambda_j) from a dense eigendecomposition of
/// each component's adjacency. Throws Errc::component_too_large past the cap.
CentralityTable subgraph_centrality(const ProjectedGraph& g, size_t component_cap = 10000);

/// Mean of neighbors' (raw) degrees; 0 for isolated nodes.
CentralityTable average_neighbor_degree(const ProjectedGraph& g);

/// Newman's current-flow betweenness via the Laplacian pseudoinverse, computed
/// and normalized per component by (m - 1)(m - 2) / 2; nodes in components of
/// size <= 2 get 0. Throws Errc::component_too_large past the cap.
CentralityTable current_flow_betweenness(const ProjectedGraph& g, size_t component_cap = 10000);

CentralityTable compute_measure(const ProjectedGraph& g, Measure m, size_t component_cap = 10000);

/// Rows: node_id,measure,year,side,value ordered by (measure, node_id).
void write_centrality_csv(std::ostream& out, std::span<const CentralityTable> tables);

enum class InvestorScope {
  birth_year, // investors with deals for the firm in its birth year
  all_years,  // any investor of the firm present in the birth-year projection
};

struct FeatureOptions {
  InvestorScope investor_scope = InvestorScope::birth_year;
  size_t component_cap = 10000;
};

/// Per-firm network features. Investor-side entries are maxima over the
/// firm's investors on the birth-year investor projection; firm-side entries
/// are the firm's own values on the cumulative firm projection at its first
/// funding year. Keys: inv_<measure>_max and firm_<measure>. Missing graphs
/// or degenerate eigenvector components leave the entry unset rather than 0.
struct FirmFeatureVector {
  std::string firm_id;
  int birth_year = 0;
  int first_funding_year = 0;
  std::map<std::string, std::optional<double>> features;
};

std::string investor_feature_key(Measure m);
std::string firm_feature_key(Measure m);

std::vector<FirmFeatureVector> assemble_firm_features(const Dataset& d,
                                                      const std::vector<std::string>& cohort,
                                                      GraphCache& graphs,
                                                      const FeatureOptions& opts = {});

/// Rows: firm_id,birth_year,first_funding_year,<feature...>; unset features
/// write empty fields. Column order is fixed (investor block then firm block).
void write_features_csv(std::ostream& out, std::span<const FirmFeatureVector> rows);

} // namespace vcnet
