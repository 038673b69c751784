#include "vcnet/community.hpp"

#include "vcnet/error.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace vcnet;
using testutil::complete_graph;
using testutil::letter_graph;

namespace {

// Best modularity over every partition of n nodes (restricted growth strings).
double best_partition_modularity(const oracle::SimpleGraph& g, std::vector<int>& best) {
  const size_t n = static_cast<size_t>(g.n);
  best.assign(n, 0);
  if (n == 0) return 0.0;
  std::vector<int> labels(n, 0);
  double best_q = -1e300;
  while (true) {
    const double q = oracle::modularity(g, labels);
    if (q > best_q) {
      best_q = q;
      best = labels;
    }
    size_t i = n - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, labels[j]);
      if (labels[i] <= prefix_max) {
        ++labels[i];
        std::fill(labels.begin() + static_cast<long>(i) + 1, labels.end(), 0);
        break;
      }
    }
    if (i == 0) return best_q;
  }
}

std::set<std::set<std::string>> groups_of(const Partition& p) {
  std::map<int, std::set<std::string>> by_community;
  for (const auto& [id, c] : p.assignment) by_community[c].insert(id);
  std::set<std::set<std::string>> out;
  for (auto& [c, members] : by_community) out.insert(members);
  return out;
}

} // namespace

TEST_SUITE("community") {

TEST_CASE("two 4-cliques joined by an edge split apart") {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      edges.emplace_back(i, j);
      edges.emplace_back(4 + i, 4 + j);
    }
  edges.emplace_back(3, 4);
  const auto g = letter_graph(8, edges);

  oracle::SimpleGraph sg = oracle::from_projected(g);
  std::vector<int> best;
  const double best_q = best_partition_modularity(sg, best);

  for (uint64_t seed : {1ull, 7ull, 99ull}) {
    const auto p = louvain(g, seed);
    CHECK(p.modularity == doctest::Approx(best_q).epsilon(1e-12));
    CHECK(p.community_count == 2);
    const auto groups = groups_of(p);
    CHECK(groups.count({"a", "b", "c", "d"}) == 1);
    CHECK(groups.count({"e", "f", "g", "h"}) == 1);
  }
}

TEST_CASE("a lone clique is one community") {
  const auto p = louvain(complete_graph(3), 5);
  CHECK(p.community_count == 1);
  for (const auto& [id, c] : p.assignment) CHECK(c == 0);
}

TEST_CASE("empty graph yields an empty partition") {
  const auto g = letter_graph(0, {});
  const auto p = louvain(g, 1);
  CHECK(p.assignment.empty());
  CHECK(p.community_count == 0);
  CHECK(p.modularity == 0.0);
  CHECK(weighted_modularity(g, {}) == 0.0);
}

TEST_CASE("modularity matches the definitional oracle, including weights") {
  auto g = ProjectedGraph::from_edges(Side::firms, 2000, {"a", "b", "c", "d"},
                                      {{0, 1, 3}, {1, 2, 1}, {2, 3, 2}, {0, 3, 1}});
  const std::map<std::string, int> assignment{{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}};
  // By hand: W = 7, intra weights 3 and 2, community strengths 4+4 and 3+3.
  const double expected = (3.0 / 7.0 - 64.0 / 196.0) + (2.0 / 7.0 - 36.0 / 196.0);
  CHECK(weighted_modularity(g, assignment) == doctest::Approx(expected).epsilon(1e-12));
  // Resolution scales the null term.
  const double gamma = 1.7;
  const double scaled = (3.0 / 7.0 - gamma * 64.0 / 196.0) + (2.0 / 7.0 - gamma * 36.0 / 196.0);
  CHECK(weighted_modularity(g, assignment, gamma) == doctest::Approx(scaled).epsilon(1e-12));
}

TEST_CASE("louvain respects edge weights") {
  // Unweighted this is a 4-cycle; the heavy opposite edges pull the split to
  // {a,b} / {c,d}.
  auto g = ProjectedGraph::from_edges(Side::firms, 2000, {"a", "b", "c", "d"},
                                      {{0, 1, 10}, {1, 2, 1}, {2, 3, 10}, {0, 3, 1}});
  const auto p = louvain(g, 3);
  const auto groups = groups_of(p);
  CHECK(groups.count({"a", "b"}) == 1);
  CHECK(groups.count({"c", "d"}) == 1);
}

TEST_CASE("community indices are contiguous and ordered by first appearance") {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      edges.emplace_back(i, j);
      edges.emplace_back(4 + i, 4 + j);
    }
  const auto g = letter_graph(8, edges);
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const auto p = louvain(g, seed);
    REQUIRE(p.community_count == 2);
    CHECK(p.assignment.at("a") == 0); // smallest id always lands in community 0
    CHECK(p.assignment.at("e") == 1);
  }
}

TEST_CASE("rank by size, ties by smallest member") {
  Partition p;
  // Sizes: community 0 = 5, 1 = 3, 2 = 3, 3 = 1. Tie between 1 and 2 goes to
  // the one holding the smaller id.
  const char* names[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
  const int communities[] = {0, 0, 0, 0, 0, 1, 2, 1, 2, 1, 2, 3};
  for (int i = 0; i < 12; ++i) p.assignment[names[i]] = communities[i];
  p.community_count = 4;
  CHECK(rank_communities(p) == std::vector<int>{0, 1, 2, 3});

  Partition q;
  q.assignment = {{"z", 0}, {"m", 1}, {"a", 2}};
  q.community_count = 3;
  CHECK(rank_communities(q) == std::vector<int>{2, 1, 0});

  Partition single;
  single.assignment = {{"a", 0}, {"b", 0}};
  single.community_count = 1;
  CHECK(rank_communities(single) == std::vector<int>{0});
}

TEST_CASE("composition profile shares and unknown counts") {
  Partition p;
  p.side = Side::firms;
  p.assignment = {{"f1", 0}, {"f2", 0}, {"f3", 0}, {"f4", 0}};
  p.community_count = 1;

  std::map<std::string, FirmRecord> firms;
  auto mk = [&](const std::string& id, FirmStatus status, const char* continent) {
    FirmRecord r;
    r.firm_id = id;
    r.name = id;
    r.status = status;
    r.subsector = "biotech";
    if (continent) r.continent = continent;
    firms[id] = r;
  };
  mk("f1", FirmStatus::active, "North America");
  mk("f2", FirmStatus::active, "North America");
  mk("f3", FirmStatus::acquired, "Europe");
  mk("f4", FirmStatus::acquired, "Europe");

  const auto profile = composition_profile(p, 0, firms);
  CHECK(profile.size == 4);
  CHECK(profile.continent_shares.at("North America") == doctest::Approx(0.5));
  CHECK(profile.continent_shares.at("Europe") == doctest::Approx(0.5));
  CHECK(profile.status_shares.at("active") == doctest::Approx(0.5));
  CHECK(profile.status_shares.at("acquired") == doctest::Approx(0.5));
  CHECK(profile.subsector_shares.at("biotech") == doctest::Approx(1.0));
  CHECK(profile.unknown_continent == 0);
}

TEST_CASE("profiles with unknown labels stay empty") {
  Partition p;
  p.assignment = {{"f1", 0}, {"f2", 0}};
  p.community_count = 1;
  std::map<std::string, FirmRecord> firms;
  for (const char* id : {"f1", "f2"}) {
    FirmRecord r;
    r.firm_id = id;
    firms[id] = r; // no subsector/continent, status unknown
  }
  const auto profile = composition_profile(p, 0, firms);
  CHECK(profile.size == 2);
  CHECK(profile.subsector_shares.empty());
  CHECK(profile.status_shares.empty());
  CHECK(profile.continent_shares.empty());
  CHECK(profile.unknown_subsector == 2);
  CHECK(profile.unknown_status == 2);
  CHECK(profile.unknown_continent == 2);

  CHECK_THROWS_AS(composition_profile(p, 9, firms), Error);
  try {
    composition_profile(p, 9, firms);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_community);
  }
}

TEST_CASE("partition csv") {
  Partition p;
  p.assignment = {{"b", 1}, {"a", 0}};
  p.community_count = 2;
  std::ostringstream out;
  write_partition_csv(out, p);
  CHECK(out.str() == "node_id,community\na,0\nb,1\n");
}

TEST_CASE("louvain is deterministic per seed") {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 10; ++i) edges.emplace_back(i, (i + 1) % 10);
  edges.emplace_back(0, 5);
  const auto g = letter_graph(10, edges);
  const auto p1 = louvain(g, 12345);
  const auto p2 = louvain(g, 12345);
  CHECK(p1.assignment == p2.assignment);
  CHECK(p1.modularity == p2.modularity);
}

} // TEST_SUITE
