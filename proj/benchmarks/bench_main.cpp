#include "vcnet/centrality.hpp"
#include "vcnet/community.hpp"
#include "vcnet/fda.hpp"
#include "vcnet/graph.hpp"
#include "vcnet/rng.hpp"
#include "vcnet/stats.hpp"
#include "vcnet/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

using namespace vcnet;

namespace {

ProjectedGraph random_projected(int n, double p, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> ids;
  ids.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "n%04d", i);
    ids.emplace_back(buf);
  }
  std::vector<std::tuple<int, int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) edges.emplace_back(u, v, 1);
  return ProjectedGraph::from_edges(Side::firms, 2010, std::move(ids), std::move(edges));
}

const ProjectedGraph& shared_graph(int n) {
  static const ProjectedGraph g200 = random_projected(200, 0.04, 11);
  static const ProjectedGraph g600 = random_projected(600, 0.013, 12);
  return n <= 200 ? g200 : g600;
}

void bench_betweenness(benchmark::State& state) {
  const auto& g = shared_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(betweenness_centrality(g));
}

void bench_eigenvector(benchmark::State& state) {
  const auto& g = shared_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eigenvector_centrality(g));
}

void bench_pagerank(benchmark::State& state) {
  const auto& g = shared_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pagerank(g));
}

void bench_current_flow(benchmark::State& state) {
  const auto& g = shared_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(current_flow_betweenness(g));
}

void bench_voterank(benchmark::State& state) {
  const auto& g = shared_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(voterank(g));
}

void bench_louvain(benchmark::State& state) {
  const auto& g = shared_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(louvain(g, 7));
}

void bench_projection(benchmark::State& state) {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.n_firms = static_cast<int>(state.range(0));
  cfg.n_investors = cfg.n_firms / 8 + 10;
  const auto result = generate(cfg);
  const auto g = TemporalBipartiteGraph::build(result.data);
  for (auto _ : state)
    benchmark::DoNotOptimize(project_firms_cumulative(g, g.max_year()));
}

void bench_kmeans(benchmark::State& state) {
  std::mt19937_64 rng(5);
  TrajectoryGrid grid;
  for (int i = 0; i <= 100; ++i) grid.grid.push_back(0.1 * i);
  const int rows = static_cast<int>(state.range(0));
  for (int r = 0; r < rows; ++r) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "f%04d", r);
    grid.firm_ids.emplace_back(buf);
    std::vector<double> row(101);
    double level = 0.0;
    for (size_t i = 0; i < row.size(); ++i) {
      if (i % 7 == 3) level += (r % 4 == 0 ? 10.0 : 1.0) * uniform01(rng);
      row[i] = level;
    }
    grid.rows.push_back(std::move(row));
  }
  KMeansParams params;
  params.seed = 1;
  params.restarts = 8;
  for (auto _ : state) benchmark::DoNotOptimize(functional_kmeans(grid, params));
}

void bench_logistic(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const size_t n = static_cast<size_t>(state.range(0));
  FeatureMatrix m;
  m.columns = {"a", "b", "c", "d"};
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "r%05u", static_cast<unsigned>(i));
    m.row_ids.emplace_back(buf);
    std::vector<double> row(4);
    for (auto& v : row) v = normal01(rng);
    const double eta = 0.4 * row[0] - 0.6 * row[2];
    y[i] = uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    m.values.push_back(std::move(row));
  }
  for (auto _ : state) benchmark::DoNotOptimize(logistic_fit(m, y));
}

void bench_best_subset(benchmark::State& state) {
  std::mt19937_64 rng(8);
  const size_t p = static_cast<size_t>(state.range(0));
  const size_t n = 120;
  FeatureMatrix m;
  std::vector<double> y(n);
  for (size_t j = 0; j < p; ++j) m.columns.push_back("x" + std::to_string(j));
  for (size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "r%05u", static_cast<unsigned>(i));
    m.row_ids.emplace_back(buf);
    std::vector<double> row(p);
    for (auto& v : row) v = normal01(rng);
    y[i] = row[0] - 2.0 * row[p / 2] + normal01(rng);
    m.values.push_back(std::move(row));
  }
  for (auto _ : state) benchmark::DoNotOptimize(best_subset(m, y, 4));
}

} // namespace

BENCHMARK(bench_betweenness)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_eigenvector)->Arg(200)->Arg(600)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_pagerank)->Arg(200)->Arg(600)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_current_flow)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_voterank)->Arg(200)->Arg(600)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_louvain)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_projection)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_kmeans)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_logistic)->Arg(500)->Arg(4000)->Unit(benchmark::kMicrosecond);
BENCHMARK(bench_best_subset)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
