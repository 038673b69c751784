#pragma once

#include "vcnet/records.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vcnet {

/// Cumulative funding raised since birth, as a right-continuous step function
/// on [0, horizon). Deals at or past the horizon are excluded; deals dated
/// before birth are dropped and counted in negative_offset_deals.
struct FundingTrajectory {
  std::string firm_id;
  double horizon = 10.0;
  std::vector<double> times;      // sorted, unique, in [0, horizon)
  std::vector<double> amounts;    // positive jump at times[i]
  std::vector<double> cumulative; // prefix sums of amounts
  size_t negative_offset_deals = 0;

  double value_at(double t) const; // jump at exactly t included
  double terminal() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

FundingTrajectory build_trajectory(const FirmRecord& firm,
                                   std::span<const DealRecord* const> deals,
                                   double horizon = 10.0);

/// One trajectory per cohort firm with a birth year, sorted by firm_id.
std::vector<FundingTrajectory> build_cohort_trajectories(const Dataset& d,
                                                         const std::vector<std::string>& cohort,
                                                         double horizon = 10.0);

enum class TrajectoryScale { raw_usd, log1p_usd };

struct TrajectoryGrid {
  std::vector<double> grid; // uniform over [0, horizon], horizon/step + 1 points
  std::vector<std::string> firm_ids;
  std::vector<std::vector<double>> rows; // firm x grid, non-decreasing
  TrajectoryScale scale = TrajectoryScale::raw_usd;
};

/// Evaluates every trajectory on the shared grid. Throws Errc::bad_config
/// when step does not divide the horizon evenly.
TrajectoryGrid resample_to_grid(const std::vector<FundingTrajectory>& trajs, double step = 0.1,
                                TrajectoryScale scale = TrajectoryScale::raw_usd,
                                double horizon = 10.0);

enum class Regime { high, low };
const char* regime_name(Regime r) noexcept;

struct KMeansParams {
  int k = 2;
  int restarts = 20;
  uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 500;
};

struct RegimeLabeling {
  std::string subsector; // empty for a whole-cohort run
  std::map<std::string, Regime> labels;
  std::vector<std::vector<double>> centroids; // index 0 = high, 1 = low
  std::vector<size_t> cluster_sizes;          // aligned with centroids
  double inertia = 0.0;
};

/// Lloyd iterations under the trapezoid-weighted L2 metric, best of
/// `restarts` k-means++ starts. Rows are ordered by firm_id internally, so
/// labels do not depend on input row order. An empty cluster re-seeds its
/// centroid at the row farthest from its own centroid. "high" is the
/// centroid with the larger terminal value. Throws Errc::too_few_curves when
/// distinct rows < k and Errc::bad_config unless k == 2.
RegimeLabeling functional_kmeans(const TrajectoryGrid& grid, const KMeansParams& params = {});

struct SubsectorClustering {
  std::map<std::string, RegimeLabeling> by_subsector;
  std::vector<std::string> skipped; // fewer than 2k curves
};

/// Independent clustering per sub-sector; per-sector seeds are derived from
/// params.seed and the sub-sector name.
SubsectorClustering cluster_by_subsector(const std::map<std::string, TrajectoryGrid>& grids,
                                         const KMeansParams& params = {});

/// Rows: firm_id,t,value.
void write_grid_csv(std::ostream& out, const TrajectoryGrid& g);
/// Rows: firm_id,subsector,regime.
void write_labels_csv(std::ostream& out, std::span<const RegimeLabeling> labelings);
/// Rows: subsector,regime,t,value.
void write_centroids_csv(std::ostream& out, std::span<const RegimeLabeling> labelings,
                         const std::vector<double>& grid);

} // namespace vcnet
