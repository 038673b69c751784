#include "vcnet/community.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"
#include "vcnet/rng.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

namespace vcnet {

double weighted_modularity(const ProjectedGraph& g, const std::map<std::string, int>& assignment,
                           double resolution) {
  double m = 0.0;
  for (const auto& [u, v, w] : g.edges) m += w;
  if (m == 0.0) return 0.0;
  std::map<int, double> intra, total_degree;
  std::vector<int> com(g.node_count());
  for (size_t v = 0; v < g.node_count(); ++v) com[v] = assignment.at(g.ids[v]);
  for (const auto& [u, v, w] : g.edges) {
    if (com[static_cast<size_t>(u)] == com[static_cast<size_t>(v)])
      intra[com[static_cast<size_t>(u)]] += w;
    total_degree[com[static_cast<size_t>(u)]] += w;
    total_degree[com[static_cast<size_t>(v)]] += w;
  }
  double q = 0.0;
  for (const auto& [c, k] : total_degree) {
    const double share = k / (2.0 * m);
    q += intra[c] / m - resolution * share * share;
  }
  return q;
}

namespace {

// One aggregation level: weighted adjacency without self entries plus a
// separate loop weight (counted twice in the degree).
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> loop;
  std::vector<double> degree;
  double m2 = 0.0; // sum of degrees

  double modularity(const std::vector<int>& com, double resolution) const {
    std::map<int, double> intra, total;
    for (size_t v = 0; v < adj.size(); ++v) {
      intra[com[v]] += loop[v];
      total[com[v]] += degree[v];
      for (auto [u, w] : adj[v])
        if (com[static_cast<size_t>(u)] == com[v] && u > static_cast<int>(v)) intra[com[v]] += w;
    }
    double q = 0.0;
    const double m = m2 / 2.0;
    for (const auto& [c, k] : total) {
      const double share = k / m2;
      q += intra[c] / m - resolution * share * share;
    }
    return q;
  }
};

// Moves nodes greedily until a full sweep makes no move. Returns true if
// anything moved. `com` holds a contiguous-from-0 relabeling afterwards.
bool local_moving(const LevelGraph& g, std::vector<int>& com, double resolution,
                  std::mt19937_64& rng) {
  const size_t n = g.adj.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  seeded_shuffle(order, rng);

  std::vector<double> tot(n, 0.0);
  for (size_t v = 0; v < n; ++v) tot[static_cast<size_t>(com[v])] += g.degree[v];

  std::vector<double> w_to(n, 0.0);
  std::vector<int> touched;
  bool any_move = false;
  for (bool moved = true; moved;) {
    moved = false;
    for (int v : order) {
      const auto vi = static_cast<size_t>(v);
      const int old_com = com[vi];
      touched.clear();
      for (auto [u, w] : g.adj[vi]) {
        const int c = com[static_cast<size_t>(u)];
        if (w_to[static_cast<size_t>(c)] == 0.0) touched.push_back(c);
        w_to[static_cast<size_t>(c)] += w;
      }
      std::sort(touched.begin(), touched.end());
      tot[static_cast<size_t>(old_com)] -= g.degree[vi];
      int best = old_com;
      double best_gain =
          w_to[static_cast<size_t>(old_com)] -
          resolution * g.degree[vi] * tot[static_cast<size_t>(old_com)] / g.m2;
      for (int c : touched) {
        if (c == old_com) continue;
        const double gain = w_to[static_cast<size_t>(c)] -
                            resolution * g.degree[vi] * tot[static_cast<size_t>(c)] / g.m2;
        if (gain > best_gain) {
          best = c;
          best_gain = gain;
        }
      }
      tot[static_cast<size_t>(best)] += g.degree[vi];
      com[vi] = best;
      if (best != old_com) {
        moved = true;
        any_move = true;
      }
      for (int c : touched) w_to[static_cast<size_t>(c)] = 0.0;
      if (w_to[static_cast<size_t>(old_com)] != 0.0) w_to[static_cast<size_t>(old_com)] = 0.0;
    }
  }

  std::vector<int> relabel(n, -1);
  int next = 0;
  for (size_t v = 0; v < n; ++v) {
    auto& slot = relabel[static_cast<size_t>(com[v])];
    if (slot < 0) slot = next++;
    com[v] = slot;
  }
  return any_move;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& com, int community_count) {
  LevelGraph next;
  next.adj.resize(static_cast<size_t>(community_count));
  next.loop.assign(static_cast<size_t>(community_count), 0.0);
  next.degree.assign(static_cast<size_t>(community_count), 0.0);
  std::map<std::pair<int, int>, double> weights;
  for (size_t v = 0; v < g.adj.size(); ++v) {
    next.loop[static_cast<size_t>(com[v])] += g.loop[v];
    for (auto [u, w] : g.adj[v]) {
      if (u < static_cast<int>(v)) continue;
      const int a = std::min(com[v], com[static_cast<size_t>(u)]);
      const int b = std::max(com[v], com[static_cast<size_t>(u)]);
      if (a == b)
        next.loop[static_cast<size_t>(a)] += w;
      else
        weights[{a, b}] += w;
    }
  }
  for (const auto& [pair, w] : weights) {
    next.adj[static_cast<size_t>(pair.first)].emplace_back(pair.second, w);
    next.adj[static_cast<size_t>(pair.second)].emplace_back(pair.first, w);
  }
  for (auto& nbrs : next.adj) std::sort(nbrs.begin(), nbrs.end());
  for (size_t v = 0; v < next.adj.size(); ++v) {
    next.degree[v] = 2.0 * next.loop[v];
    for (auto [u, w] : next.adj[v]) next.degree[v] += w;
  }
  next.m2 = std::accumulate(next.degree.begin(), next.degree.end(), 0.0);
  return next;
}

} // namespace

Partition louvain(const ProjectedGraph& g, uint64_t seed, double resolution) {
  Partition p;
  p.side = g.side;
  p.year = g.year;
  const size_t n = g.node_count();
  if (n == 0) return p;

  LevelGraph level;
  level.adj.resize(n);
  level.loop.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  for (const auto& [u, v, w] : g.edges) {
    level.adj[static_cast<size_t>(u)].emplace_back(v, static_cast<double>(w));
    level.adj[static_cast<size_t>(v)].emplace_back(u, static_cast<double>(w));
  }
  for (size_t v = 0; v < n; ++v) {
    std::sort(level.adj[v].begin(), level.adj[v].end());
    for (auto [u, w] : level.adj[v]) level.degree[v] += w;
  }
  level.m2 = std::accumulate(level.degree.begin(), level.degree.end(), 0.0);

  std::vector<int> node_com(n);
  std::iota(node_com.begin(), node_com.end(), 0);
  if (level.m2 > 0.0) {
    std::mt19937_64 rng(seed);
    std::vector<int> com(n);
    std::iota(com.begin(), com.end(), 0);
    double prev_q = level.modularity(com, resolution);
    while (true) {
      const bool moved = local_moving(level, com, resolution, rng);
      const double q = level.modularity(com, resolution);
      if (q < prev_q - 1e-12)
        throw Error(Errc::internal, "modularity decreased across a louvain pass");
      for (auto& c : node_com) c = com[static_cast<size_t>(c)];
      if (!moved || q - prev_q < 1e-12) break;
      prev_q = q;
      const int count = 1 + *std::max_element(com.begin(), com.end());
      level = aggregate(level, com, count);
      com.assign(level.adj.size(), 0);
      std::iota(com.begin(), com.end(), 0);
    }
  }

  std::vector<int> relabel(n, -1);
  int next = 0;
  for (size_t v = 0; v < n; ++v) {
    auto& slot = relabel[static_cast<size_t>(node_com[v])];
    if (slot < 0) slot = next++;
    p.assignment.emplace(g.ids[v], slot);
  }
  p.community_count = next;
  p.modularity = weighted_modularity(g, p.assignment, resolution);
  return p;
}

std::vector<int> rank_communities(const Partition& p) {
  std::vector<size_t> size(static_cast<size_t>(p.community_count), 0);
  std::vector<std::string> smallest(static_cast<size_t>(p.community_count));
  for (const auto& [id, c] : p.assignment) { // map order: first hit is smallest id
    auto ci = static_cast<size_t>(c);
    if (size[ci] == 0) smallest[ci] = id;
    ++size[ci];
  }
  std::vector<int> order(static_cast<size_t>(p.community_count));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    auto ai = static_cast<size_t>(a), bi = static_cast<size_t>(b);
    if (size[ai] != size[bi]) return size[ai] > size[bi];
    return smallest[ai] < smallest[bi];
  });
  return order;
}

CommunityProfile composition_profile(const Partition& p, int community,
                                     const std::map<std::string, FirmRecord>& firms) {
  if (community < 0 || community >= p.community_count)
    throw Error(Errc::unknown_community, "community " + std::to_string(community) + " not in partition");
  CommunityProfile out;
  out.community = community;
  std::map<std::string, size_t> subsector, status, continent;
  for (const auto& [id, c] : p.assignment) {
    if (c != community) continue;
    ++out.size;
    auto firm = firms.find(id);
    if (firm == firms.end()) {
      ++out.unknown_subsector;
      ++out.unknown_status;
      ++out.unknown_continent;
      continue;
    }
    if (firm->second.subsector)
      ++subsector[*firm->second.subsector];
    else
      ++out.unknown_subsector;
    if (firm->second.status != FirmStatus::unknown)
      ++status[firm_status_name(firm->second.status)];
    else
      ++out.unknown_status;
    if (firm->second.continent)
      ++continent[*firm->second.continent];
    else
      ++out.unknown_continent;
  }
  auto shares = [](const std::map<std::string, size_t>& counts, std::map<std::string, double>& out_map) {
    size_t total = 0;
    for (const auto& [label, c] : counts) total += c;
    for (const auto& [label, c] : counts)
      out_map.emplace(label, static_cast<double>(c) / static_cast<double>(total));
  };
  shares(subsector, out.subsector_shares);
  shares(status, out.status_shares);
  shares(continent, out.continent_shares);
  return out;
}

void write_partition_csv(std::ostream& out, const Partition& p) {
  write_csv_record(out, std::vector<std::string>{"node_id", "community"});
  for (const auto& [id, c] : p.assignment)
    write_csv_record(out, std::vector<std::string>{id, std::to_string(c)});
}

} // namespace vcnet
