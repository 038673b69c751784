#pragma once

#include "vcnet/centrality.hpp"
#include "vcnet/fda.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vcnet {

enum class Transform { none, log1p, zscore, log1p_then_zscore };
const char* transform_name(Transform t) noexcept;

struct FeatureMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values; // rows x columns, complete
  std::map<std::string, Transform> transforms;

  size_t n() const noexcept { return row_ids.size(); }
  size_t p() const noexcept { return columns.size(); }
  int column_index(const std::string& name) const; // -1 when absent
};

struct MatrixBuild {
  FeatureMatrix matrix;
  size_t excluded_rows = 0; // firms dropped for a missing requested feature
};

/// Keeps the firms with every requested feature present; rows stay in input
/// order (assembly order is firm_id-sorted, so the matrix is too).
MatrixBuild build_feature_matrix(std::span<const FirmFeatureVector> rows,
                                 const std::vector<std::string>& columns);

struct TransformPolicy {
  std::vector<std::string> log1p_columns; // applied before the z-score
  bool zscore_all = true;
};

/// log1p on the configured columns, then z-scoring (sample SD) of every
/// column. Throws Errc::constant_column on zero variance.
FeatureMatrix apply_transforms(const FeatureMatrix& m, const TransformPolicy& policy);

enum class CorrelationDistance { one_minus_r, one_minus_abs_r };

struct DendrogramNode {
  int left = -1, right = -1; // node indices; leaves have feature >= 0 instead
  int feature = -1;
  double height = 0.0;
  std::vector<int> members; // column indices
};

struct Dendrogram {
  std::vector<DendrogramNode> nodes; // p leaves first, then p-1 merges; root last
};

struct DedupResult {
  std::vector<std::string> selected;                // representatives, column order
  std::vector<std::vector<std::string>> clusters;   // cut at k, each name-sorted
  Dendrogram tree;
};

/// Complete-linkage agglomeration under d = 1 - r (or 1 - |r|), cut at k
/// clusters; each cluster is represented by its medoid (max mean |r| to the
/// other members, ties to the lexicographically smallest name).
DedupResult correlation_dedup(const FeatureMatrix& m, int k = 4,
                              CorrelationDistance dist = CorrelationDistance::one_minus_r);

struct LogisticFit {
  std::vector<std::string> terms; // "(intercept)" first
  std::vector<double> coef, se, z, p; // Wald
  double null_deviance = 0.0, residual_deviance = 0.0, deviance_explained = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  size_t n = 0;
};

/// Maximum likelihood by IRLS with Wald standard errors from the observed
/// information. Separation is flagged (converged = false), not thrown.
/// Throws Errc::singular_design on a rank-deficient design and
/// Errc::bad_config unless both classes are present.
LogisticFit logistic_fit(const FeatureMatrix& x, const std::vector<int>& y, double tol = 1e-10,
                         int max_iter = 100);

/// Likelihood-ratio p-value of nested fits (chi-squared on the df gap).
double logistic_lr_pvalue(const LogisticFit& full, const LogisticFit& reduced);

struct ResamplingRecord {
  std::vector<double> coef, p;
  double deviance_explained = 0.0;
  bool converged = false;
};

struct ResamplingSummary {
  std::vector<std::string> terms;
  std::vector<ResamplingRecord> records; // one per repetition
  std::vector<double> coef_mean, coef_sd; // over converged repetitions
  size_t converged_count = 0;
  size_t rows_per_repetition = 0; // 2 x minority size
};

/// Each repetition keeps the whole minority class plus a seeded
/// minority-sized draw (without replacement) from the majority class, then
/// fits the logistic model on those 2 x minority rows.
ResamplingSummary balanced_resampling(const FeatureMatrix& x, const std::vector<int>& y,
                                      int reps = 1000, uint64_t seed = 0);

struct LinearFit {
  std::vector<std::string> terms;
  std::vector<double> coef, se, t, p;
  double r2 = 0.0, adj_r2 = 0.0, residual_se = 0.0;
  double f_stat = 0.0, f_pvalue = 1.0;
  size_t n = 0;
  int df_residual = 0;
};

/// Least squares via column-pivoted QR; classical SEs, t-based p-values.
/// Throws Errc::singular_design / Errc::bad_config (n <= p + 1).
LinearFit ols_fit(const FeatureMatrix& x, const std::vector<double>& y);

struct SubsetFit {
  std::vector<std::string> features; // name-sorted
  double rss = 0.0;
};

/// Exhaustive best subset per model size, ranked by RSS, ties to the
/// lexicographically smallest feature set. Throws Errc::too_many_features
/// past 20 columns.
std::vector<SubsetFit> best_subset(const FeatureMatrix& x, const std::vector<double>& y,
                                   int max_size);

struct FunctionalFit {
  std::vector<double> grid;
  std::vector<std::string> terms;
  std::vector<std::vector<double>> coef; // per term, over the grid
  std::vector<std::vector<double>> se;
  double band_z = 1.96; // 95% bands: coef +- band_z * se
  size_t n = 0;
};

/// Pointwise least squares of each grid column on the features, one shared
/// QR across all grid points. Rows are matched by firm_id. Optional post-hoc
/// Gaussian-kernel smoothing of the coefficient curves.
FunctionalFit function_on_scalar_fit(const TrajectoryGrid& grid, const FeatureMatrix& x,
                                     std::optional<double> smoothing_bandwidth = std::nullopt);

/// Rows: term,t,estimate,se,lower,upper.
void write_functional_csv(std::ostream& out, const FunctionalFit& fit);
/// Rows: repetition,term,coefficient,neg_log_p,converged.
void write_resampling_csv(std::ostream& out, const ResamplingSummary& summary);

} // namespace vcnet
