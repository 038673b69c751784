#pragma once

#include "vcnet/records.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace vcnet {

enum class Side { firms, investors };
const char* side_name(Side s) noexcept;

struct BipartiteEdge {
  int investor = -1; // index into investor_ids()
  int firm = -1;     // index into firm_ids()
  std::string deal_id;
  std::string round_id;
  int year = 0;
  double amount = 0.0;
};

/// Investor-firm multigraph with one edge per deal and a yearly index.
/// Immutable after build.
class TemporalBipartiteGraph {
public:
  static TemporalBipartiteGraph build(const Dataset& d); // throws Errc::non_bipartite_id

  const std::vector<std::string>& investor_ids() const noexcept { return investor_ids_; }
  const std::vector<std::string>& firm_ids() const noexcept { return firm_ids_; }
  const std::vector<BipartiteEdge>& edges() const noexcept { return edges_; }
  const std::map<int, std::vector<size_t>>& year_index() const noexcept { return year_index_; }

  std::optional<int> investor_index(const std::string& id) const;
  std::optional<int> firm_index(const std::string& id) const;

  bool empty() const noexcept { return edges_.empty(); }
  int min_year() const noexcept; // 0 when empty
  int max_year() const noexcept;

private:
  std::vector<std::string> investor_ids_; // sorted
  std::vector<std::string> firm_ids_;     // sorted
  std::vector<BipartiteEdge> edges_;
  std::map<int, std::vector<size_t>> year_index_;
};

/// One year of the bipartite graph: only that year's edges and their endpoints.
struct YearlySnapshot {
  int year = 0;
  std::vector<size_t> edge_indices;
  std::vector<int> investors; // sorted node indices
  std::vector<int> firms;
};

YearlySnapshot snapshot(const TemporalBipartiteGraph& g, int year);

/// Weighted simple graph over one side. Node order is the sorted id order and
/// is the canonical ordering used by every downstream computation.
struct ProjectedGraph {
  Side side = Side::firms;
  int year = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<std::pair<int, int>>> adj; // per node: (neighbor, weight), sorted
  std::vector<std::tuple<int, int, int>> edges;      // (u, v, weight) with u < v, sorted

  size_t node_count() const noexcept { return ids.size(); }
  size_t edge_count() const noexcept { return edges.size(); }
  size_t degree(size_t v) const noexcept { return adj[v].size(); }

  /// Builds adjacency from an edge list over pre-sorted ids (test/tool helper).
  static ProjectedGraph from_edges(Side side, int year, std::vector<std::string> ids,
                                   std::vector<std::tuple<int, int, int>> edges);
};

enum class FirmLinkRule {
  same_year,  // common bidder invested in both firms in the same calendar year
  cross_year, // common bidder invested in both firms in any years up to the projection year
};

/// Firms co-invested by a common bidder, accumulated over all years <= `year`.
/// Nodes are all firms active in any year <= `year`. Under same_year the
/// weight counts (bidder, year) pairs producing the link; under cross_year it
/// counts distinct bidders.
ProjectedGraph project_firms_cumulative(const TemporalBipartiteGraph& g, int year,
                                        FirmLinkRule rule = FirmLinkRule::same_year);

/// Investors sharing a (firm, round) with deal year == `year`; weight counts
/// shared (firm, round) pairs. Non-cumulative; nodes are the year's active
/// investors.
ProjectedGraph project_investors(const TemporalBipartiteGraph& g, int year);

/// Memoizes projections per year so feature assembly and the pipeline stages
/// share one copy. Not thread-safe; build per worker or pre-warm.
class GraphCache {
 public:
  explicit GraphCache(const TemporalBipartiteGraph& g,
                      FirmLinkRule rule = FirmLinkRule::same_year)
      : g_(&g), rule_(rule) {}

  const ProjectedGraph& firms_at(int year);
  const ProjectedGraph& investors_at(int year);
  FirmLinkRule rule() const noexcept { return rule_; }

 private:
  const TemporalBipartiteGraph* g_;
  FirmLinkRule rule_;
  std::map<int, ProjectedGraph> firms_, investors_;
};

void write_edge_list(std::ostream& out, const ProjectedGraph& g);
void write_node_list(std::ostream& out, const ProjectedGraph& g);

} // namespace vcnet
