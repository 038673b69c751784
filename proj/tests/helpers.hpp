#pragma once

#include "vcnet/graph.hpp"
#include "vcnet/records.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace testutil {

// Single-letter ids so lexicographic order equals index order (n <= 26).
inline vcnet::ProjectedGraph letter_graph(int n, const std::vector<std::pair<int, int>>& edges,
                                          vcnet::Side side = vcnet::Side::firms,
                                          int year = 2000) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.emplace_back(1, static_cast<char>('a' + i));
  std::vector<std::tuple<int, int, int>> list;
  for (auto [u, v] : edges) list.emplace_back(std::min(u, v), std::max(u, v), 1);
  return vcnet::ProjectedGraph::from_edges(side, year, std::move(ids), std::move(list));
}

inline vcnet::ProjectedGraph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return letter_graph(n, edges);
}

inline vcnet::ProjectedGraph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return letter_graph(n, edges);
}

// Center is node 0 ("a").
inline vcnet::ProjectedGraph star_graph(int leaves) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return letter_graph(leaves + 1, edges);
}

inline double value_of(const std::map<std::string, double>& values, const std::string& id) {
  auto it = values.find(id);
  return it == values.end() ? -1e300 : it->second;
}

struct DealSpec {
  std::string investor, firm, round;
  int year = 2000;
  double amount = 1e6;
};

// Minimal consistent dataset: each firm is born in its first deal year unless
// overridden via `births`.
inline vcnet::Dataset make_dataset(const std::vector<DealSpec>& specs,
                                   const std::map<std::string, int>& births = {}) {
  vcnet::Dataset d;
  int serial = 0;
  for (const auto& s : specs) {
    vcnet::DealRecord rec;
    rec.deal_id = "d" + std::to_string(++serial);
    rec.round_id = s.round;
    rec.investor_id = s.investor;
    rec.firm_id = s.firm;
    rec.amount_usd = s.amount;
    rec.date = vcnet::CivilDate{s.year, 6, 15};
    rec.year = s.year;
    d.deals.push_back(rec);
    if (!d.investors.count(s.investor))
      d.investors.emplace(s.investor, vcnet::InvestorRecord{s.investor, s.investor});
    auto [it, inserted] = d.firms.try_emplace(s.firm);
    if (inserted) {
      it->second.firm_id = s.firm;
      it->second.name = s.firm;
      it->second.birth_year = s.year;
      it->second.subsector = "s";
      it->second.status = vcnet::FirmStatus::active;
    } else if (it->second.birth_year && s.year < *it->second.birth_year) {
      it->second.birth_year = s.year;
    }
  }
  for (const auto& [firm, year] : births) {
    auto it = d.firms.find(firm);
    if (it != d.firms.end()) it->second.birth_year = year;
  }
  return d;
}

} // namespace testutil
