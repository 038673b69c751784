#include "vcnet/graph.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace vcnet {

const char* side_name(Side s) noexcept { return s == Side::firms ? "firms" : "investors"; }

namespace {

std::unordered_map<std::string, int> index_of(const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> m;
  m.reserve(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) m.emplace(ids[i], static_cast<int>(i));
  return m;
}

} // namespace

TemporalBipartiteGraph TemporalBipartiteGraph::build(const Dataset& d) {
  std::set<std::string> investor_set, firm_set;
  for (const auto& deal : d.deals) {
    investor_set.insert(deal.investor_id);
    firm_set.insert(deal.firm_id);
  }
  for (const auto& id : investor_set)
    if (firm_set.contains(id))
      throw Error(Errc::non_bipartite_id, "'" + id + "' appears as both investor and firm");

  TemporalBipartiteGraph g;
  g.investor_ids_.assign(investor_set.begin(), investor_set.end());
  g.firm_ids_.assign(firm_set.begin(), firm_set.end());
  const auto inv_index = index_of(g.investor_ids_);
  const auto firm_index = index_of(g.firm_ids_);

  g.edges_.reserve(d.deals.size());
  for (const auto& deal : d.deals) {
    BipartiteEdge e;
    e.investor = inv_index.at(deal.investor_id);
    e.firm = firm_index.at(deal.firm_id);
    e.deal_id = deal.deal_id;
    e.round_id = deal.round_id;
    e.year = deal.year;
    e.amount = deal.amount_usd;
    g.year_index_[e.year].push_back(g.edges_.size());
    g.edges_.push_back(std::move(e));
  }
  return g;
}

std::optional<int> TemporalBipartiteGraph::investor_index(const std::string& id) const {
  auto it = std::lower_bound(investor_ids_.begin(), investor_ids_.end(), id);
  if (it == investor_ids_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - investor_ids_.begin());
}

std::optional<int> TemporalBipartiteGraph::firm_index(const std::string& id) const {
  auto it = std::lower_bound(firm_ids_.begin(), firm_ids_.end(), id);
  if (it == firm_ids_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - firm_ids_.begin());
}

int TemporalBipartiteGraph::min_year() const noexcept {
  return year_index_.empty() ? 0 : year_index_.begin()->first;
}

int TemporalBipartiteGraph::max_year() const noexcept {
  return year_index_.empty() ? 0 : year_index_.rbegin()->first;
}

YearlySnapshot snapshot(const TemporalBipartiteGraph& g, int year) {
  YearlySnapshot s;
  s.year = year;
  auto it = g.year_index().find(year);
  if (it == g.year_index().end()) return s;
  std::set<int> investors, firms;
  for (size_t e : it->second) {
    s.edge_indices.push_back(e);
    investors.insert(g.edges()[e].investor);
    firms.insert(g.edges()[e].firm);
  }
  s.investors.assign(investors.begin(), investors.end());
  s.firms.assign(firms.begin(), firms.end());
  return s;
}

ProjectedGraph ProjectedGraph::from_edges(Side side, int year, std::vector<std::string> ids,
                                          std::vector<std::tuple<int, int, int>> edges) {
  ProjectedGraph g;
  g.side = side;
  g.year = year;
  g.ids = std::move(ids);
  g.adj.resize(g.ids.size());
  std::sort(edges.begin(), edges.end());
  for (auto& [u, v, w] : edges) {
    g.adj[static_cast<size_t>(u)].emplace_back(v, w);
    g.adj[static_cast<size_t>(v)].emplace_back(u, w);
  }
  for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
  g.edges = std::move(edges);
  return g;
}

namespace {

// Maps a set of side-node indices (into the bipartite id table) to a
// ProjectedGraph with its own contiguous, id-sorted node numbering.
ProjectedGraph assemble_projection(Side side, int year, const std::vector<std::string>& side_ids,
                                   const std::set<int>& active,
                                   const std::map<std::pair<int, int>, int>& weights) {
  std::vector<std::string> ids;
  ids.reserve(active.size());
  std::unordered_map<int, int> renumber;
  renumber.reserve(active.size());
  for (int node : active) { // ascending index == ascending id (side_ids are sorted)
    renumber.emplace(node, static_cast<int>(ids.size()));
    ids.push_back(side_ids[static_cast<size_t>(node)]);
  }
  std::vector<std::tuple<int, int, int>> edges;
  edges.reserve(weights.size());
  for (const auto& [pair, w] : weights)
    edges.emplace_back(renumber.at(pair.first), renumber.at(pair.second), w);
  return ProjectedGraph::from_edges(side, year, std::move(ids), std::move(edges));
}

} // namespace

ProjectedGraph project_firms_cumulative(const TemporalBipartiteGraph& g, int year,
                                        FirmLinkRule rule) {
  std::set<int> active;
  std::map<std::pair<int, int>, int> weights;

  if (rule == FirmLinkRule::same_year) {
    for (const auto& [y, edge_ids] : g.year_index()) {
      if (y > year) break;
      std::map<int, std::set<int>> firms_by_investor;
      for (size_t e : edge_ids) {
        active.insert(g.edges()[e].firm);
        firms_by_investor[g.edges()[e].investor].insert(g.edges()[e].firm);
      }
      for (const auto& [investor, firms] : firms_by_investor) {
        for (auto i = firms.begin(); i != firms.end(); ++i)
          for (auto j = std::next(i); j != firms.end(); ++j) ++weights[{*i, *j}];
      }
    }
  } else {
    std::map<int, std::set<int>> firms_by_investor; // over all years <= year
    for (const auto& [y, edge_ids] : g.year_index()) {
      if (y > year) break;
      for (size_t e : edge_ids) {
        active.insert(g.edges()[e].firm);
        firms_by_investor[g.edges()[e].investor].insert(g.edges()[e].firm);
      }
    }
    for (const auto& [investor, firms] : firms_by_investor) {
      for (auto i = firms.begin(); i != firms.end(); ++i)
        for (auto j = std::next(i); j != firms.end(); ++j) ++weights[{*i, *j}];
    }
  }
  return assemble_projection(Side::firms, year, g.firm_ids(), active, weights);
}

ProjectedGraph project_investors(const TemporalBipartiteGraph& g, int year) {
  std::set<int> active;
  std::map<std::pair<int, int>, int> weights;
  auto it = g.year_index().find(year);
  if (it != g.year_index().end()) {
    std::map<std::pair<int, std::string>, std::set<int>> by_round; // (firm, round) -> investors
    for (size_t e : it->second) {
      const auto& edge = g.edges()[e];
      active.insert(edge.investor);
      by_round[{edge.firm, edge.round_id}].insert(edge.investor);
    }
    for (const auto& [round, investors] : by_round) {
      for (auto i = investors.begin(); i != investors.end(); ++i)
        for (auto j = std::next(i); j != investors.end(); ++j) ++weights[{*i, *j}];
    }
  }
  return assemble_projection(Side::investors, year, g.investor_ids(), active, weights);
}

const ProjectedGraph& GraphCache::firms_at(int year) {
  auto it = firms_.find(year);
  if (it == firms_.end()) it = firms_.emplace(year, project_firms_cumulative(*g_, year, rule_)).first;
  return it->second;
}

const ProjectedGraph& GraphCache::investors_at(int year) {
  auto it = investors_.find(year);
  if (it == investors_.end()) it = investors_.emplace(year, project_investors(*g_, year)).first;
  return it->second;
}

void write_edge_list(std::ostream& out, const ProjectedGraph& g) {
  write_csv_record(out, std::vector<std::string>{"u", "v", "weight"});
  for (const auto& [u, v, w] : g.edges)
    write_csv_record(out, std::vector<std::string>{g.ids[static_cast<size_t>(u)],
                                                   g.ids[static_cast<size_t>(v)],
                                                   std::to_string(w)});
}

void write_node_list(std::ostream& out, const ProjectedGraph& g) {
  write_csv_record(out, std::vector<std::string>{"node_id"});
  for (const auto& id : g.ids) write_csv_record(out, std::vector<std::string>{id});
}

} // namespace vcnet
