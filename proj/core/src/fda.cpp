#include "vcnet/fda.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/dates.hpp"
#include "vcnet/error.hpp"
#include "vcnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

namespace vcnet {

double FundingTrajectory::value_at(double t) const {
  const auto idx = static_cast<size_t>(
      std::upper_bound(times.begin(), times.end(), t) - times.begin());
  return idx == 0 ? 0.0 : cumulative[idx - 1];
}

FundingTrajectory build_trajectory(const FirmRecord& firm,
                                   std::span<const DealRecord* const> deals, double horizon) {
  if (!firm.birth_year)
    throw Error(Errc::bad_field, "firm '" + firm.firm_id + "' lacks a birth year");
  FundingTrajectory traj;
  traj.firm_id = firm.firm_id;
  traj.horizon = horizon;
  std::map<double, double> jumps;
  for (const DealRecord* deal : deals) {
    if (deal->missing_amount || deal->amount_usd <= 0.0) continue;
    const double offset = years_since_birth(deal->date, *firm.birth_year);
    if (offset < 0.0) {
      ++traj.negative_offset_deals;
      continue;
    }
    if (offset >= horizon) continue;
    jumps[offset] += deal->amount_usd;
  }
  traj.times.reserve(jumps.size());
  traj.amounts.reserve(jumps.size());
  for (const auto& [t, amount] : jumps) {
    traj.times.push_back(t);
    traj.amounts.push_back(amount);
  }
  traj.cumulative.resize(traj.amounts.size());
  std::partial_sum(traj.amounts.begin(), traj.amounts.end(), traj.cumulative.begin());
  return traj;
}

std::vector<FundingTrajectory> build_cohort_trajectories(const Dataset& d,
                                                         const std::vector<std::string>& cohort,
                                                         double horizon) {
  std::map<std::string, std::vector<const DealRecord*>> deals_by_firm;
  for (const auto& deal : d.deals) deals_by_firm[deal.firm_id].push_back(&deal);
  std::vector<std::string> firms(cohort.begin(), cohort.end());
  std::sort(firms.begin(), firms.end());
  firms.erase(std::unique(firms.begin(), firms.end()), firms.end());

  std::vector<FundingTrajectory> out;
  out.reserve(firms.size());
  static const std::vector<const DealRecord*> no_deals;
  for (const auto& id : firms) {
    auto firm = d.firms.find(id);
    if (firm == d.firms.end() || !firm->second.birth_year) continue;
    auto deals = deals_by_firm.find(id);
    out.push_back(build_trajectory(firm->second,
                                   deals == deals_by_firm.end() ? no_deals : deals->second,
                                   horizon));
  }
  return out;
}

TrajectoryGrid resample_to_grid(const std::vector<FundingTrajectory>& trajs, double step,
                                TrajectoryScale scale, double horizon) {
  if (!(step > 0.0) || !(horizon > 0.0))
    throw Error(Errc::bad_config, "grid step and horizon must be positive");
  const double count = horizon / step;
  const auto points = static_cast<size_t>(std::llround(count));
  if (points == 0 || std::abs(count - static_cast<double>(points)) > 1e-9)
    throw Error(Errc::bad_config, "grid step must divide the horizon evenly");

  TrajectoryGrid g;
  g.scale = scale;
  g.grid.resize(points + 1);
  for (size_t i = 0; i < points; ++i) g.grid[i] = static_cast<double>(i) * step;
  g.grid[points] = horizon;
  g.firm_ids.reserve(trajs.size());
  g.rows.reserve(trajs.size());
  for (const auto& traj : trajs) {
    g.firm_ids.push_back(traj.firm_id);
    std::vector<double> row(g.grid.size());
    for (size_t i = 0; i < g.grid.size(); ++i) {
      const double v = traj.value_at(g.grid[i]);
      row[i] = scale == TrajectoryScale::log1p_usd ? std::log1p(v) : v;
    }
    g.rows.push_back(std::move(row));
  }
  return g;
}

const char* regime_name(Regime r) noexcept { return r == Regime::high ? "high" : "low"; }

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  const size_t m = grid.size();
  std::vector<double> w(m, 0.0);
  if (m == 1) {
    w[0] = 1.0;
    return w;
  }
  w[0] = (grid[1] - grid[0]) / 2.0;
  w[m - 1] = (grid[m - 1] - grid[m - 2]) / 2.0;
  for (size_t i = 1; i + 1 < m; ++i) w[i] = (grid[i + 1] - grid[i - 1]) / 2.0;
  return w;
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b,
                   const std::vector<double>& w) {
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += w[i] * d * d;
  }
  return total;
}

struct KMeansRun {
  std::vector<int> assign;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;
};

KMeansRun lloyd_run(const std::vector<const std::vector<double>*>& rows,
                    const std::vector<double>& w, const KMeansParams& params, uint64_t seed) {
  const size_t n = rows.size();
  const auto k = static_cast<size_t>(params.k);
  std::mt19937_64 rng(seed);

  KMeansRun run;
  run.centroids.reserve(k);
  run.centroids.push_back(*rows[bounded(rng, n)]);
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; ++i) d2[i] = sq_distance(*rows[i], run.centroids[0], w);
  while (run.centroids.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    size_t pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (cum > target) {
          pick = i;
          break;
        }
        if (i + 1 == n) pick = i;
      }
    } else {
      pick = bounded(rng, n);
    }
    run.centroids.push_back(*rows[pick]);
    for (size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], sq_distance(*rows[i], run.centroids.back(), w));
  }

  run.assign.assign(n, -1);
  std::vector<int> prev_assign;
  std::vector<size_t> counts(k, 0);
  double prev_inertia = -1.0;
  for (int iter = 0; iter < params.max_iter; ++iter) {
    prev_assign = run.assign;
    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_distance(*rows[i], run.centroids[0], w);
      for (size_t c = 1; c < k; ++c) {
        const double d = sq_distance(*rows[i], run.centroids[c], w);
        if (d < best_d) {
          best = static_cast<int>(c);
          best_d = d;
        }
      }
      run.assign[i] = best;
      ++counts[static_cast<size_t>(best)];
    }
    for (size_t c = 0; c < k; ++c) { // re-seed empty clusters at the farthest row
      if (counts[c] > 0) continue;
      size_t far = 0;
      double far_d = -1.0;
      for (size_t i = 0; i < n; ++i) {
        const double d = sq_distance(*rows[i], run.centroids[static_cast<size_t>(run.assign[i])], w);
        if (d > far_d) {
          far = i;
          far_d = d;
        }
      }
      run.centroids[c] = *rows[far];
    }
    if (run.assign == prev_assign) break;
    for (size_t c = 0; c < k; ++c)
      if (counts[c] > 0) std::fill(run.centroids[c].begin(), run.centroids[c].end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      auto& centroid = run.centroids[static_cast<size_t>(run.assign[i])];
      for (size_t g = 0; g < centroid.size(); ++g) centroid[g] += (*rows[i])[g];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (auto& v : run.centroids[c]) v /= static_cast<double>(counts[c]);
    }
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i)
      inertia += sq_distance(*rows[i], run.centroids[static_cast<size_t>(run.assign[i])], w);
    if (prev_inertia >= 0.0 && inertia > prev_inertia * (1.0 + 1e-12) + 1e-9)
      throw Error(Errc::internal, "k-means inertia increased within a run");
    if (prev_inertia >= 0.0 && prev_inertia - inertia <= params.tol * std::max(1.0, prev_inertia))
      break;
    prev_inertia = inertia;
  }

  run.inertia = 0.0;
  for (size_t i = 0; i < n; ++i)
    run.inertia += sq_distance(*rows[i], run.centroids[static_cast<size_t>(run.assign[i])], w);
  return run;
}

} // namespace

RegimeLabeling functional_kmeans(const TrajectoryGrid& grid, const KMeansParams& params) {
  if (params.k != 2) throw Error(Errc::bad_config, "regime clustering is defined for k = 2");
  if (params.restarts < 1 || params.max_iter < 1)
    throw Error(Errc::bad_config, "k-means needs at least one restart and one iteration");

  std::vector<size_t> order(grid.firm_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return grid.firm_ids[a] < grid.firm_ids[b]; });
  std::vector<const std::vector<double>*> rows;
  rows.reserve(order.size());
  for (size_t i : order) rows.push_back(&grid.rows[i]);

  if (rows.size() < static_cast<size_t>(params.k))
    throw Error(Errc::too_few_curves, "need at least " + std::to_string(params.k) +
                                          " curves, have " + std::to_string(rows.size()));

  const std::vector<double> w = trapezoid_weights(grid.grid);
  KMeansRun best;
  bool have_best = false;
  for (int r = 0; r < params.restarts; ++r) {
    KMeansRun run = lloyd_run(rows, w, params, derive_seed(params.seed, static_cast<uint64_t>(r)));
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }

  int high = 0; // larger terminal value; full-curve comparison breaks ties
  if (best.centroids[1].back() > best.centroids[0].back() ||
      (best.centroids[1].back() == best.centroids[0].back() && best.centroids[1] > best.centroids[0]))
    high = 1;

  RegimeLabeling out;
  out.centroids = {best.centroids[static_cast<size_t>(high)],
                   best.centroids[static_cast<size_t>(1 - high)]};
  out.cluster_sizes.assign(2, 0);
  out.inertia = best.inertia;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Regime r = best.assign[i] == high ? Regime::high : Regime::low;
    out.labels.emplace(grid.firm_ids[order[i]], r);
    ++out.cluster_sizes[r == Regime::high ? 0 : 1];
  }
  return out;
}

SubsectorClustering cluster_by_subsector(const std::map<std::string, TrajectoryGrid>& grids,
                                         const KMeansParams& params) {
  SubsectorClustering out;
  for (const auto& [subsector, grid] : grids) {
    if (grid.firm_ids.size() < 2 * static_cast<size_t>(params.k)) {
      out.skipped.push_back(subsector);
      continue;
    }
    KMeansParams local = params;
    uint64_t h = 1469598103934665603ull; // FNV-1a over the sub-sector name
    for (unsigned char c : subsector) h = (h ^ c) * 1099511628211ull;
    local.seed = derive_seed(params.seed, h);
    try {
      RegimeLabeling labeling = functional_kmeans(grid, local);
      labeling.subsector = subsector;
      out.by_subsector.emplace(subsector, std::move(labeling));
    } catch (const Error& e) {
      if (e.code() != Errc::too_few_curves) throw;
      out.skipped.push_back(subsector);
    }
  }
  return out;
}

void write_grid_csv(std::ostream& out, const TrajectoryGrid& g) {
  write_csv_record(out, std::vector<std::string>{"firm_id", "t", "value"});
  for (size_t i = 0; i < g.firm_ids.size(); ++i)
    for (size_t j = 0; j < g.grid.size(); ++j)
      write_csv_record(out, std::vector<std::string>{g.firm_ids[i], format_double(g.grid[j]),
                                                     format_double(g.rows[i][j])});
}

void write_labels_csv(std::ostream& out, std::span<const RegimeLabeling> labelings) {
  write_csv_record(out, std::vector<std::string>{"firm_id", "subsector", "regime"});
  for (const auto& labeling : labelings)
    for (const auto& [firm, regime] : labeling.labels)
      write_csv_record(out,
                       std::vector<std::string>{firm, labeling.subsector, regime_name(regime)});
}

void write_centroids_csv(std::ostream& out, std::span<const RegimeLabeling> labelings,
                         const std::vector<double>& grid) {
  write_csv_record(out, std::vector<std::string>{"subsector", "regime", "t", "value"});
  for (const auto& labeling : labelings) {
    for (size_t c = 0; c < labeling.centroids.size(); ++c) {
      const char* regime = c == 0 ? "high" : "low";
      for (size_t j = 0; j < grid.size(); ++j)
        write_csv_record(out,
                         std::vector<std::string>{labeling.subsector, regime,
                                                  format_double(grid[j]),
                                                  format_double(labeling.centroids[c][j])});
    }
  }
}

} // namespace vcnet
