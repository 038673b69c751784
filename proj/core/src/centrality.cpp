#include "vcnet/centrality.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

namespace vcnet {

const char* measure_name(Measure m) noexcept {
  switch (m) {
    case Measure::degree: return "degree";
    case Measure::betweenness: return "betweenness";
    case Measure::eigenvector: return "eigenvector";
    case Measure::voterank: return "voterank";
    case Measure::pagerank: return "pagerank";
    case Measure::closeness: return "closeness";
    case Measure::subgraph: return "subgraph";
    case Measure::avg_neighbor_degree: return "avg_neighbor_degree";
    case Measure::current_flow_betweenness: return "current_flow_betweenness";
  }
  return "?";
}

std::optional<Measure> parse_measure(std::string_view name) {
  for (Measure m : all_measures)
    if (name == measure_name(m)) return m;
  return std::nullopt;
}

namespace {

CentralityTable make_table(const ProjectedGraph& g, Measure m, const std::vector<double>& vals) {
  CentralityTable t;
  t.side = g.side;
  t.year = g.year;
  t.measure = m;
  for (size_t v = 0; v < g.node_count(); ++v) t.values.emplace(g.ids[v], vals[v]);
  return t;
}

// Nodes sorted within each component; components ordered by smallest node.
std::vector<std::vector<int>> components(const ProjectedGraph& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<int> comp(static_cast<size_t>(n), -1);
  std::vector<std::vector<int>> out;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<size_t>(s)] >= 0) continue;
    const int c = static_cast<int>(out.size());
    out.emplace_back();
    comp[static_cast<size_t>(s)] = c;
    stack.assign(1, s);
    out.back().push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (auto [u, w] : g.adj[static_cast<size_t>(v)]) {
        if (comp[static_cast<size_t>(u)] < 0) {
          comp[static_cast<size_t>(u)] = c;
          stack.push_back(u);
          out.back().push_back(u);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

} // namespace

CentralityTable degree_centrality(const ProjectedGraph& g) {
  const size_t n = g.node_count();
  std::vector<double> vals(n, 0.0);
  if (n >= 2)
    for (size_t v = 0; v < n; ++v)
      vals[v] = static_cast<double>(g.degree(v)) / static_cast<double>(n - 1);
  return make_table(g, Measure::degree, vals);
}

CentralityTable betweenness_centrality(const ProjectedGraph& g) {
  const int n = static_cast<int>(g.node_count());
  std::vector<double> cb(static_cast<size_t>(n), 0.0);
  if (n >= 3) {
    std::vector<int> dist(static_cast<size_t>(n));
    std::vector<double> sigma(static_cast<size_t>(n)), delta(static_cast<size_t>(n));
    std::vector<std::vector<int>> pred(static_cast<size_t>(n));
    std::vector<int> order;
    order.reserve(static_cast<size_t>(n));
    std::deque<int> q;
    for (int s = 0; s < n; ++s) {
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0.0);
      for (auto& p : pred) p.clear();
      order.clear();
      dist[static_cast<size_t>(s)] = 0;
      sigma[static_cast<size_t>(s)] = 1.0;
      q.assign(1, s);
      while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        order.push_back(v);
        for (auto [u, w] : g.adj[static_cast<size_t>(v)]) {
          auto ui = static_cast<size_t>(u);
          if (dist[ui] < 0) {
            dist[ui] = dist[static_cast<size_t>(v)] + 1;
            q.push_back(u);
          }
          if (dist[ui] == dist[static_cast<size_t>(v)] + 1) {
            sigma[ui] += sigma[static_cast<size_t>(v)];
            pred[ui].push_back(v);
          }
        }
      }
      std::fill(delta.begin(), delta.end(), 0.0);
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto w = static_cast<size_t>(*it);
        for (int v : pred[w])
          delta[static_cast<size_t>(v)] += sigma[static_cast<size_t>(v)] / sigma[w] * (1.0 + delta[w]);
        if (*it != s) cb[w] += delta[w];
      }
    }
    const double scale = 1.0 / (static_cast<double>(n - 1) * static_cast<double>(n - 2));
    for (auto& x : cb) x *= scale;
  }
  return make_table(g, Measure::betweenness, cb);
}

CentralityTable eigenvector_centrality(const ProjectedGraph& g, double tol, int max_iter) {
  if (g.edge_count() == 0)
    throw Error(Errc::no_convergence, "eigenvector centrality undefined without edges");
  const size_t n = g.node_count();
  std::vector<double> vals(n, 0.0);
  std::vector<int> local(n, -1);
  for (const auto& comp : components(g)) {
    const size_t m = comp.size();
    if (m < 2) continue;
    for (size_t i = 0; i < m; ++i) local[static_cast<size_t>(comp[i])] = static_cast<int>(i);
    std::vector<double> x(m, 1.0 / std::sqrt(static_cast<double>(m))), next(m);
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
      for (size_t i = 0; i < m; ++i) { // (A + I) x keeps bipartite components aperiodic
        double acc = x[i];
        for (auto [u, w] : g.adj[static_cast<size_t>(comp[i])])
          acc += x[static_cast<size_t>(local[static_cast<size_t>(u)])];
        next[i] = acc;
      }
      const double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
      double diff = 0.0;
      for (size_t i = 0; i < m; ++i) {
        next[i] /= norm;
        diff += std::abs(next[i] - x[i]);
      }
      x.swap(next);
      converged = diff < tol;
    }
    if (!converged)
      throw Error(Errc::no_convergence, "eigenvector power iteration hit max_iter");
    for (size_t i = 0; i < m; ++i) vals[static_cast<size_t>(comp[i])] = x[i];
  }
  double norm = std::sqrt(std::inner_product(vals.begin(), vals.end(), vals.begin(), 0.0));
  if (norm > 0.0)
    for (auto& v : vals) v /= norm;
  return make_table(g, Measure::eigenvector, vals);
}

CentralityTable voterank(const ProjectedGraph& g) {
  const size_t n = g.node_count();
  std::vector<double> rank(n, 1.0);
  size_t degree_sum = 0;
  for (size_t v = 0; v < n; ++v) degree_sum += g.degree(v);
  if (degree_sum > 0) {
    const double delta = static_cast<double>(n) / static_cast<double>(degree_sum); // 1/<k>
    std::vector<double> ability(n, 1.0), score(n);
    std::vector<char> elected(n, 0);
    size_t elected_count = 0;
    while (true) {
      std::fill(score.begin(), score.end(), 0.0);
      for (size_t v = 0; v < n; ++v) {
        if (ability[v] == 0.0) continue;
        for (auto [u, w] : g.adj[v]) score[static_cast<size_t>(u)] += ability[v];
      }
      int best = -1;
      double best_score = 0.0;
      for (size_t v = 0; v < n; ++v) {
        if (!elected[v] && score[v] > best_score) {
          best = static_cast<int>(v);
          best_score = score[v];
        }
      }
      if (best < 0) break;
      elected[static_cast<size_t>(best)] = 1;
      rank[static_cast<size_t>(best)] = static_cast<double>(++elected_count);
      ability[static_cast<size_t>(best)] = 0.0;
      for (auto [u, w] : g.adj[static_cast<size_t>(best)])
        ability[static_cast<size_t>(u)] = std::max(0.0, ability[static_cast<size_t>(u)] - delta);
    }
    for (size_t v = 0; v < n; ++v)
      if (!elected[v]) rank[v] = static_cast<double>(elected_count + 1);
  }
  return make_table(g, Measure::voterank, rank);
}

CentralityTable pagerank(const ProjectedGraph& g, double damping, double tol, int max_iter) {
  const size_t n = g.node_count();
  std::vector<double> x(n, n ? 1.0 / static_cast<double>(n) : 0.0), next(n);
  if (n > 0) {
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
      double dangling = 0.0;
      for (size_t v = 0; v < n; ++v)
        if (g.degree(v) == 0) dangling += x[v];
      const double base = (1.0 - damping + damping * dangling) / static_cast<double>(n);
      std::fill(next.begin(), next.end(), base);
      for (size_t v = 0; v < n; ++v) {
        if (g.degree(v) == 0) continue;
        const double share = damping * x[v] / static_cast<double>(g.degree(v));
        for (auto [u, w] : g.adj[v]) next[static_cast<size_t>(u)] += share;
      }
      double err = 0.0;
      for (size_t v = 0; v < n; ++v) err += std::abs(next[v] - x[v]);
      x.swap(next);
      converged = err < static_cast<double>(n) * tol;
    }
    if (!converged) throw Error(Errc::no_convergence, "pagerank hit max_iter");
    const double total = std::accumulate(x.begin(), x.end(), 0.0);
    for (auto& v : x) v /= total;
  }
  return make_table(g, Measure::pagerank, x);
}

CentralityTable closeness_centrality(const ProjectedGraph& g) {
  const size_t n = g.node_count();
  std::vector<double> vals(n, 0.0);
  std::vector<int> dist(n);
  std::deque<int> q;
  for (size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    q.assign(1, static_cast<int>(s));
    long long total = 0;
    size_t reached = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (auto [u, w] : g.adj[static_cast<size_t>(v)]) {
        if (dist[static_cast<size_t>(u)] < 0) {
          dist[static_cast<size_t>(u)] = dist[static_cast<size_t>(v)] + 1;
          total += dist[static_cast<size_t>(u)];
          ++reached;
          q.push_back(u);
        }
      }
    }
    if (reached > 0) {
      const double r = static_cast<double>(reached);
      vals[s] = r / static_cast<double>(n - 1) * (r / static_cast<double>(total));
    }
  }
  return make_table(g, Measure::closeness, vals);
}

CentralityTable subgraph_centrality(const ProjectedGraph& g, size_t component_cap) {
  const size_t n = g.node_count();
  std::vector<double> vals(n, 0.0);
  std::vector<int> local(n, -1);
  for (const auto& comp : components(g)) {
    const size_t m = comp.size();
    if (m > component_cap)
      throw Error(Errc::component_too_large,
                  "subgraph centrality component of " + std::to_string(m) + " nodes exceeds cap " +
                      std::to_string(component_cap));
    if (m == 1) {
      vals[static_cast<size_t>(comp[0])] = 1.0;
      continue;
    }
    for (size_t i = 0; i < m; ++i) local[static_cast<size_t>(comp[i])] = static_cast<int>(i);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (size_t i = 0; i < m; ++i)
      for (auto [u, w] : g.adj[static_cast<size_t>(comp[i])])
        a(static_cast<Eigen::Index>(i), local[static_cast<size_t>(u)]) = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const auto& lam = es.eigenvalues();
    const auto& u = es.eigenvectors();
    for (size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < lam.size(); ++j)
        s += u(static_cast<Eigen::Index>(i), j) * u(static_cast<Eigen::Index>(i), j) * std::exp(lam[j]);
      vals[static_cast<size_t>(comp[i])] = s;
    }
  }
  return make_table(g, Measure::subgraph, vals);
}

CentralityTable average_neighbor_degree(const ProjectedGraph& g) {
  const size_t n = g.node_count();
  std::vector<double> vals(n, 0.0);
  for (size_t v = 0; v < n; ++v) {
    if (g.degree(v) == 0) continue;
    size_t total = 0;
    for (auto [u, w] : g.adj[v]) total += g.degree(static_cast<size_t>(u));
    vals[v] = static_cast<double>(total) / static_cast<double>(g.degree(v));
  }
  return make_table(g, Measure::avg_neighbor_degree, vals);
}

CentralityTable current_flow_betweenness(const ProjectedGraph& g, size_t component_cap) {
  const size_t n = g.node_count();
  std::vector<double> vals(n, 0.0);
  std::vector<int> local(n, -1);
  std::vector<std::pair<double, int>> sorted;
  for (const auto& comp : components(g)) {
    const size_t m = comp.size();
    if (m > component_cap)
      throw Error(Errc::component_too_large,
                  "current-flow component of " + std::to_string(m) + " nodes exceeds cap " +
                      std::to_string(component_cap));
    if (m <= 2) continue;
    for (size_t i = 0; i < m; ++i) local[static_cast<size_t>(comp[i])] = static_cast<int>(i);
    const auto mi = static_cast<Eigen::Index>(m);
    // (L + J/m) is SPD and shares the pseudoinverse's row differences.
    Eigen::MatrixXd lj = Eigen::MatrixXd::Constant(mi, mi, 1.0 / static_cast<double>(m));
    for (size_t i = 0; i < m; ++i) {
      lj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) +=
          static_cast<double>(g.degree(static_cast<size_t>(comp[i])));
      for (auto [u, w] : g.adj[static_cast<size_t>(comp[i])])
        lj(static_cast<Eigen::Index>(i), local[static_cast<size_t>(u)]) -= 1.0;
    }
    Eigen::MatrixXd inv = lj.llt().solve(Eigen::MatrixXd::Identity(mi, mi));

    std::vector<double> acc(m, 0.0);
    std::vector<double> f(m);
    for (size_t i = 0; i < m; ++i) {
      for (auto [u, w] : g.adj[static_cast<size_t>(comp[i])]) {
        const int lu = local[static_cast<size_t>(u)];
        if (lu <= static_cast<int>(i)) continue;
        for (size_t j = 0; j < m; ++j)
          f[j] = inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                 inv(static_cast<Eigen::Index>(lu), static_cast<Eigen::Index>(j));
        sorted.clear();
        for (size_t j = 0; j < m; ++j) sorted.emplace_back(f[j], static_cast<int>(j));
        std::sort(sorted.begin(), sorted.end());
        double s = 0.0; // sum over pairs of |F[s] - F[t]| via sorted ranks
        for (size_t pos = 0; pos < m; ++pos)
          s += (2.0 * static_cast<double>(pos + 1) - 1.0 - static_cast<double>(m)) * sorted[pos].first;
        acc[i] += 0.5 * s;
        acc[static_cast<size_t>(lu)] += 0.5 * s;
      }
    }
    const double pairs = 0.5 * static_cast<double>(m - 1) * static_cast<double>(m - 2);
    const double endpoint = 0.5 * static_cast<double>(m - 1);
    for (size_t i = 0; i < m; ++i)
      vals[static_cast<size_t>(comp[i])] = (acc[i] - endpoint) / pairs;
  }
  return make_table(g, Measure::current_flow_betweenness, vals);
}

CentralityTable compute_measure(const ProjectedGraph& g, Measure m, size_t component_cap) {
  switch (m) {
    case Measure::degree: return degree_centrality(g);
    case Measure::betweenness: return betweenness_centrality(g);
    case Measure::eigenvector: return eigenvector_centrality(g);
    case Measure::voterank: return voterank(g);
    case Measure::pagerank: return pagerank(g);
    case Measure::closeness: return closeness_centrality(g);
    case Measure::subgraph: return subgraph_centrality(g, component_cap);
    case Measure::avg_neighbor_degree: return average_neighbor_degree(g);
    case Measure::current_flow_betweenness: return current_flow_betweenness(g, component_cap);
  }
  throw Error(Errc::internal, "unknown measure");
}

void write_centrality_csv(std::ostream& out, std::span<const CentralityTable> tables) {
  write_csv_record(out, std::vector<std::string>{"node_id", "measure", "year", "side", "value"});
  for (const auto& t : tables) {
    for (const auto& [id, value] : t.values)
      write_csv_record(out, std::vector<std::string>{id, measure_name(t.measure),
                                                     std::to_string(t.year), side_name(t.side),
                                                     format_double(value)});
  }
}

std::string investor_feature_key(Measure m) {
  return "inv_" + std::string(measure_name(m)) + "_max";
}

std::string firm_feature_key(Measure m) { return "firm_" + std::string(measure_name(m)); }

namespace {

struct YearTables {
  const ProjectedGraph* graph = nullptr;
  std::map<Measure, CentralityTable> tables; // eigenvector absent when the graph has no edges
};

YearTables compute_year_tables(const ProjectedGraph& g, size_t cap) {
  YearTables yt;
  yt.graph = &g;
  for (Measure m : all_measures) {
    if (m == Measure::eigenvector && g.edge_count() == 0) continue;
    yt.tables.emplace(m, compute_measure(g, m, cap));
  }
  return yt;
}

} // namespace

std::vector<FirmFeatureVector> assemble_firm_features(const Dataset& d,
                                                      const std::vector<std::string>& cohort,
                                                      GraphCache& graphs,
                                                      const FeatureOptions& opts) {
  std::map<std::string, std::vector<const DealRecord*>> deals_by_firm;
  for (const auto& deal : d.deals) deals_by_firm[deal.firm_id].push_back(&deal);

  std::vector<std::string> firms(cohort.begin(), cohort.end());
  std::sort(firms.begin(), firms.end());
  firms.erase(std::unique(firms.begin(), firms.end()), firms.end());

  std::map<int, YearTables> firm_tables, inv_tables;
  auto firm_year = [&](int year) -> const YearTables& {
    auto it = firm_tables.find(year);
    if (it == firm_tables.end())
      it = firm_tables.emplace(year, compute_year_tables(graphs.firms_at(year), opts.component_cap)).first;
    return it->second;
  };
  auto inv_year = [&](int year) -> const YearTables& {
    auto it = inv_tables.find(year);
    if (it == inv_tables.end())
      it = inv_tables.emplace(year, compute_year_tables(graphs.investors_at(year), opts.component_cap)).first;
    return it->second;
  };

  std::vector<FirmFeatureVector> out;
  out.reserve(firms.size());
  for (const auto& firm_id : firms) {
    auto deal_it = deals_by_firm.find(firm_id);
    auto firm_it = d.firms.find(firm_id);
    if (deal_it == deals_by_firm.end() || firm_it == d.firms.end() ||
        !firm_it->second.birth_year)
      continue;

    FirmFeatureVector fv;
    fv.firm_id = firm_id;
    fv.birth_year = *firm_it->second.birth_year;
    fv.first_funding_year = deal_it->second.front()->year;
    std::set<std::string> investors;
    for (const DealRecord* deal : deal_it->second) {
      fv.first_funding_year = std::min(fv.first_funding_year, deal->year);
      if (opts.investor_scope == InvestorScope::all_years || deal->year == fv.birth_year)
        investors.insert(deal->investor_id);
    }

    const YearTables& it = inv_year(fv.birth_year);
    std::vector<int> present;
    for (const auto& inv : investors) {
      const auto& ids = it.graph->ids;
      auto pos = std::lower_bound(ids.begin(), ids.end(), inv);
      if (pos != ids.end() && *pos == inv) present.push_back(static_cast<int>(pos - ids.begin()));
    }
    for (Measure m : all_measures) {
      std::optional<double> value;
      auto table = it.tables.find(m);
      if (!present.empty() && table != it.tables.end()) {
        double best = -std::numeric_limits<double>::infinity();
        for (int idx : present)
          best = std::max(best, table->second.values.at(it.graph->ids[static_cast<size_t>(idx)]));
        value = best;
      }
      fv.features.emplace(investor_feature_key(m), value);
    }

    const YearTables& ft = firm_year(fv.first_funding_year);
    auto fpos = std::lower_bound(ft.graph->ids.begin(), ft.graph->ids.end(), firm_id);
    const bool in_graph = fpos != ft.graph->ids.end() && *fpos == firm_id;
    const size_t fidx = in_graph ? static_cast<size_t>(fpos - ft.graph->ids.begin()) : 0;
    for (Measure m : all_measures) {
      std::optional<double> value;
      auto table = ft.tables.find(m);
      if (in_graph && table != ft.tables.end()) {
        if (m == Measure::eigenvector && ft.graph->degree(fidx) == 0) {
          // degenerate singleton component: flag instead of reporting 0
        } else {
          value = table->second.values.at(firm_id);
        }
      }
      fv.features.emplace(firm_feature_key(m), value);
    }
    out.push_back(std::move(fv));
  }
  return out;
}

void write_features_csv(std::ostream& out, std::span<const FirmFeatureVector> rows) {
  std::vector<std::string> header{"firm_id", "birth_year", "first_funding_year"};
  for (Measure m : all_measures) header.push_back(investor_feature_key(m));
  for (Measure m : all_measures) header.push_back(firm_feature_key(m));
  write_csv_record(out, header);
  for (const auto& fv : rows) {
    std::vector<std::string> rec{fv.firm_id, std::to_string(fv.birth_year),
                                 std::to_string(fv.first_funding_year)};
    auto push = [&](const std::string& key) {
      auto it = fv.features.find(key);
      if (it != fv.features.end() && it->second)
        rec.push_back(format_double(*it->second));
      else
        rec.push_back("");
    };
    for (Measure m : all_measures) push(investor_feature_key(m));
    for (Measure m : all_measures) push(firm_feature_key(m));
    write_csv_record(out, rec);
  }
}

} // namespace vcnet
