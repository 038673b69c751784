#pragma once

#include "vcnet/graph.hpp"
#include "vcnet/records.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace vcnet {

struct Partition {
  Side side = Side::firms;
  int year = 0;
  std::map<std::string, int> assignment; // node_id -> community, contiguous from 0
  int community_count = 0;
  double modularity = 0.0;
};

/// Weighted modularity with resolution parameter; 0 for edgeless graphs.
double weighted_modularity(const ProjectedGraph& g, const std::map<std::string, int>& assignment,
                           double resolution = 1.0);

/// Two-phase Louvain on the weighted graph. Sweep order is seeded; community
/// indices are renumbered by first appearance in node-id order. Modularity is
/// checked to be non-decreasing across levels (Errc::internal otherwise).
Partition louvain(const ProjectedGraph& g, uint64_t seed, double resolution = 1.0);

/// Community indices by descending size, ties by smallest member id.
std::vector<int> rank_communities(const Partition& p);

struct CommunityProfile {
  int community = 0;
  size_t size = 0;
  std::map<std::string, double> subsector_shares; // over members with known labels
  std::map<std::string, double> status_shares;
  std::map<std::string, double> continent_shares;
  size_t unknown_subsector = 0;
  size_t unknown_status = 0;
  size_t unknown_continent = 0;
};

/// Shares computed over members with known labels; throws Errc::unknown_community.
CommunityProfile composition_profile(const Partition& p, int community,
                                     const std::map<std::string, FirmRecord>& firms);

/// Rows: node_id,community.
void write_partition_csv(std::ostream& out, const Partition& p);

} // namespace vcnet
