#include "vcnet/stats.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"
#include "vcnet/rng.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace vcnet {

namespace {

using Eigen::Index;

Eigen::MatrixXd design_matrix(const FeatureMatrix& x) {
  const auto n = static_cast<Index>(x.n());
  const auto p = static_cast<Index>(x.p());
  Eigen::MatrixXd m(n, p + 1);
  m.col(0).setOnes();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j)
      m(i, j + 1) = x.values[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return m;
}

std::vector<std::string> term_names(const FeatureMatrix& x) {
  std::vector<std::string> terms{"(intercept)"};
  terms.insert(terms.end(), x.columns.begin(), x.columns.end());
  return terms;
}

double wald_pvalue(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

} // namespace

const char* transform_name(Transform t) noexcept {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log1p: return "log1p";
    case Transform::zscore: return "zscore";
    case Transform::log1p_then_zscore: return "log1p_then_zscore";
  }
  return "?";
}

int FeatureMatrix::column_index(const std::string& name) const {
  for (size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return static_cast<int>(j);
  return -1;
}

MatrixBuild build_feature_matrix(std::span<const FirmFeatureVector> rows,
                                 const std::vector<std::string>& columns) {
  MatrixBuild out;
  out.matrix.columns = columns;
  for (const auto& fv : rows) {
    std::vector<double> row;
    row.reserve(columns.size());
    bool complete = true;
    for (const auto& name : columns) {
      auto it = fv.features.find(name);
      if (it == fv.features.end() || !it->second) {
        complete = false;
        break;
      }
      row.push_back(*it->second);
    }
    if (!complete) {
      ++out.excluded_rows;
      continue;
    }
    out.matrix.row_ids.push_back(fv.firm_id);
    out.matrix.values.push_back(std::move(row));
  }
  for (const auto& name : columns) out.matrix.transforms.emplace(name, Transform::none);
  return out;
}

FeatureMatrix apply_transforms(const FeatureMatrix& m, const TransformPolicy& policy) {
  FeatureMatrix out = m;
  std::vector<bool> logged(out.p(), false);
  for (const auto& name : policy.log1p_columns) {
    const int j = out.column_index(name);
    if (j < 0) throw Error(Errc::bad_config, "log1p column '" + name + "' not in matrix");
    for (auto& row : out.values) {
      if (row[static_cast<size_t>(j)] <= -1.0)
        throw Error(Errc::bad_field, "log1p needs values > -1 in column '" + name + "'");
      row[static_cast<size_t>(j)] = std::log1p(row[static_cast<size_t>(j)]);
    }
    logged[static_cast<size_t>(j)] = true;
    out.transforms[name] = Transform::log1p;
  }
  if (policy.zscore_all) {
    const auto n = static_cast<double>(out.n());
    if (out.n() < 2) throw Error(Errc::bad_config, "z-scoring needs at least two rows");
    for (size_t j = 0; j < out.p(); ++j) {
      double mean = 0.0;
      for (const auto& row : out.values) mean += row[j];
      mean /= n;
      double ss = 0.0;
      for (const auto& row : out.values) ss += (row[j] - mean) * (row[j] - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      if (sd == 0.0)
        throw Error(Errc::constant_column, "column '" + out.columns[j] + "' has zero variance");
      for (auto& row : out.values) row[j] = (row[j] - mean) / sd;
      out.transforms[out.columns[j]] = logged[j] ? Transform::log1p_then_zscore : Transform::zscore;
    }
  }
  return out;
}

namespace {

// Pearson correlation of columns a and b; 0 when either is constant.
double column_correlation(const FeatureMatrix& m, size_t a, size_t b) {
  const auto n = static_cast<double>(m.n());
  double ma = 0.0, mb = 0.0;
  for (const auto& row : m.values) {
    ma += row[a];
    mb += row[b];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (const auto& row : m.values) {
    const double da = row[a] - ma, db = row[b] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

} // namespace

DedupResult correlation_dedup(const FeatureMatrix& m, int k, CorrelationDistance dist) {
  const auto p = static_cast<int>(m.p());
  if (k < 1 || p < k) throw Error(Errc::bad_config, "need at least k features to pick k representatives");
  if (m.n() < 2) throw Error(Errc::bad_config, "correlation needs at least two rows");

  std::vector<std::vector<double>> r(static_cast<size_t>(p), std::vector<double>(static_cast<size_t>(p), 1.0));
  for (size_t a = 0; a < static_cast<size_t>(p); ++a)
    for (size_t b = a + 1; b < static_cast<size_t>(p); ++b)
      r[a][b] = r[b][a] = column_correlation(m, a, b);

  auto distance = [&](size_t a, size_t b) {
    return dist == CorrelationDistance::one_minus_r ? 1.0 - r[a][b] : 1.0 - std::abs(r[a][b]);
  };

  DedupResult out;
  const size_t total_nodes = static_cast<size_t>(2 * p - 1);
  out.tree.nodes.reserve(total_nodes);
  for (int j = 0; j < p; ++j) {
    DendrogramNode leaf;
    leaf.feature = j;
    leaf.members = {j};
    out.tree.nodes.push_back(std::move(leaf));
  }

  std::vector<int> active(static_cast<size_t>(p));
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::vector<double>> d(total_nodes, std::vector<double>(total_nodes, 0.0));
  for (size_t a = 0; a < static_cast<size_t>(p); ++a)
    for (size_t b = 0; b < static_cast<size_t>(p); ++b)
      if (a != b) d[a][b] = distance(a, b);

  auto capture_clusters = [&]() {
    for (int node : active) {
      std::vector<std::string> names;
      for (int j : out.tree.nodes[static_cast<size_t>(node)].members)
        names.push_back(m.columns[static_cast<size_t>(j)]);
      std::sort(names.begin(), names.end());
      out.clusters.push_back(std::move(names));
    }
  };
  if (static_cast<int>(active.size()) == k) capture_clusters();

  while (active.size() > 1) {
    size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < active.size(); ++i)
      for (size_t j = i + 1; j < active.size(); ++j) {
        const double dd = d[static_cast<size_t>(active[i])][static_cast<size_t>(active[j])];
        if (dd < best) {
          best = dd;
          bi = i;
          bj = j;
        }
      }
    DendrogramNode merge;
    merge.left = active[bi];
    merge.right = active[bj];
    merge.height = best;
    merge.members = out.tree.nodes[static_cast<size_t>(active[bi])].members;
    const auto& right_members = out.tree.nodes[static_cast<size_t>(active[bj])].members;
    merge.members.insert(merge.members.end(), right_members.begin(), right_members.end());
    std::sort(merge.members.begin(), merge.members.end());
    const int node = static_cast<int>(out.tree.nodes.size());
    out.tree.nodes.push_back(std::move(merge));
    for (size_t i = 0; i < active.size(); ++i) { // complete linkage: max of the two
      if (i == bi || i == bj) continue;
      const auto other = static_cast<size_t>(active[i]);
      const double dd = std::max(d[static_cast<size_t>(active[bi])][other],
                                 d[static_cast<size_t>(active[bj])][other]);
      d[static_cast<size_t>(node)][other] = dd;
      d[other][static_cast<size_t>(node)] = dd;
    }
    active.erase(active.begin() + static_cast<long>(bj));
    active[bi] = node;
    std::sort(active.begin(), active.end());
    if (static_cast<int>(active.size()) == k) capture_clusters();
  }

  std::sort(out.clusters.begin(), out.clusters.end());
  std::vector<int> reps;
  for (const auto& names : out.clusters) {
    std::vector<int> members;
    for (const auto& name : names) members.push_back(m.column_index(name));
    int best_col = members[0];
    double best_score = -std::numeric_limits<double>::infinity();
    for (int candidate : members) {
      double score = 0.0;
      for (int other : members)
        if (other != candidate)
          score += std::abs(r[static_cast<size_t>(candidate)][static_cast<size_t>(other)]);
      score = members.size() > 1 ? score / static_cast<double>(members.size() - 1) : 1.0;
      const bool better =
          score > best_score ||
          (score == best_score &&
           m.columns[static_cast<size_t>(candidate)] < m.columns[static_cast<size_t>(best_col)]);
      if (better) {
        best_score = score;
        best_col = candidate;
      }
    }
    reps.push_back(best_col);
  }
  std::sort(reps.begin(), reps.end());
  for (int j : reps) out.selected.push_back(m.columns[static_cast<size_t>(j)]);
  return out;
}

LogisticFit logistic_fit(const FeatureMatrix& x, const std::vector<int>& y, double tol,
                         int max_iter) {
  const size_t n = x.n();
  if (y.size() != n) throw Error(Errc::bad_config, "label count does not match rows");
  const auto ones = static_cast<size_t>(std::count(y.begin(), y.end(), 1));
  if (ones == 0 || ones == n)
    throw Error(Errc::bad_config, "logistic fit needs both classes present");

  const Eigen::MatrixXd design = design_matrix(x);
  const auto p1 = design.cols();
  Eigen::VectorXd yv(static_cast<Index>(n));
  for (size_t i = 0; i < n; ++i) yv(static_cast<Index>(i)) = y[i];

  LogisticFit fit;
  fit.terms = term_names(x);
  fit.n = n;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p1);
  Eigen::VectorXd eta(static_cast<Index>(n)), mu(static_cast<Index>(n)), w(static_cast<Index>(n));
  for (int it = 1; it <= max_iter; ++it) {
    eta = design * beta;
    for (Index i = 0; i < eta.size(); ++i) {
      mu(i) = 1.0 / (1.0 + std::exp(-eta(i)));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-10);
    }
    const Eigen::VectorXd z = eta + (yv - mu).cwiseQuotient(w);
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd a = sw.asDiagonal() * design;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (it == 1 && qr.rank() < p1)
      throw Error(Errc::singular_design, "design matrix is rank deficient");
    const Eigen::VectorXd next = qr.solve(sw.cwiseProduct(z));
    if (!next.allFinite()) {
      fit.separation = true;
      break;
    }
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    fit.iterations = it;
    if (beta.cwiseAbs().maxCoeff() > 30.0) {
      fit.separation = true;
      break;
    }
    if (delta < tol) {
      fit.converged = true;
      break;
    }
  }

  eta = design * beta;
  double deviance = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    mu(i) = 1.0 / (1.0 + std::exp(-eta(i)));
    const double prob = std::clamp(mu(i), 1e-12, 1.0 - 1e-12);
    deviance += yv(i) > 0.5 ? std::log(prob) : std::log(1.0 - prob);
    w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-10);
  }
  fit.residual_deviance = -2.0 * deviance;
  const double pbar = static_cast<double>(ones) / static_cast<double>(n);
  fit.null_deviance = -2.0 * (static_cast<double>(ones) * std::log(pbar) +
                              static_cast<double>(n - ones) * std::log(1.0 - pbar));
  fit.deviance_explained = fit.null_deviance > 0.0
                               ? std::max(0.0, 1.0 - fit.residual_deviance / fit.null_deviance)
                               : 0.0;

  const Eigen::MatrixXd info = design.transpose() * w.asDiagonal() * design;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p1, p1));
  fit.coef.resize(static_cast<size_t>(p1));
  fit.se.resize(static_cast<size_t>(p1));
  fit.z.resize(static_cast<size_t>(p1));
  fit.p.resize(static_cast<size_t>(p1));
  for (Index j = 0; j < p1; ++j) {
    fit.coef[static_cast<size_t>(j)] = beta(j);
    fit.se[static_cast<size_t>(j)] = std::sqrt(std::max(cov(j, j), 0.0));
    fit.z[static_cast<size_t>(j)] =
        fit.se[static_cast<size_t>(j)] > 0.0 ? beta(j) / fit.se[static_cast<size_t>(j)] : 0.0;
    fit.p[static_cast<size_t>(j)] = wald_pvalue(fit.z[static_cast<size_t>(j)]);
  }
  return fit;
}

double logistic_lr_pvalue(const LogisticFit& full, const LogisticFit& reduced) {
  const auto df = static_cast<int>(full.terms.size()) - static_cast<int>(reduced.terms.size());
  if (df <= 0) throw Error(Errc::bad_config, "full model must have extra terms");
  const double stat = reduced.residual_deviance - full.residual_deviance;
  if (stat <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

ResamplingSummary balanced_resampling(const FeatureMatrix& x, const std::vector<int>& y, int reps,
                                      uint64_t seed) {
  const size_t n = x.n();
  if (y.size() != n) throw Error(Errc::bad_config, "label count does not match rows");
  std::vector<size_t> minority, majority;
  for (size_t i = 0; i < n; ++i) (y[i] == 1 ? minority : majority).push_back(i);
  if (minority.size() > majority.size()) std::swap(minority, majority);
  if (minority.size() < 2)
    throw Error(Errc::bad_config, "balanced resampling needs a minority class of at least 2");

  ResamplingSummary out;
  out.terms = term_names(x);
  out.rows_per_repetition = 2 * minority.size();
  out.records.reserve(static_cast<size_t>(reps));

  std::vector<size_t> draw(majority.size());
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<uint64_t>(rep)));
    std::copy(majority.begin(), majority.end(), draw.begin());
    for (size_t i = 0; i < minority.size(); ++i) {
      const size_t j = i + bounded(rng, draw.size() - i);
      std::swap(draw[i], draw[j]);
    }
    FeatureMatrix sub;
    sub.columns = x.columns;
    sub.transforms = x.transforms;
    std::vector<int> sub_y;
    auto add_row = [&](size_t i) {
      sub.row_ids.push_back(x.row_ids[i]);
      sub.values.push_back(x.values[i]);
      sub_y.push_back(y[i]);
    };
    for (size_t i : minority) add_row(i);
    for (size_t i = 0; i < minority.size(); ++i) add_row(draw[i]);

    ResamplingRecord record;
    try {
      const LogisticFit fit = logistic_fit(sub, sub_y);
      record.coef = fit.coef;
      record.p = fit.p;
      record.deviance_explained = fit.deviance_explained;
      record.converged = fit.converged && !fit.separation;
    } catch (const Error& e) {
      if (e.code() != Errc::singular_design) throw;
      record.coef.assign(out.terms.size(), std::numeric_limits<double>::quiet_NaN());
      record.p.assign(out.terms.size(), std::numeric_limits<double>::quiet_NaN());
    }
    if (record.converged) ++out.converged_count;
    out.records.push_back(std::move(record));
  }

  out.coef_mean.assign(out.terms.size(), 0.0);
  out.coef_sd.assign(out.terms.size(), 0.0);
  if (out.converged_count > 0) {
    for (const auto& record : out.records) {
      if (!record.converged) continue;
      for (size_t j = 0; j < out.terms.size(); ++j) out.coef_mean[j] += record.coef[j];
    }
    for (auto& v : out.coef_mean) v /= static_cast<double>(out.converged_count);
    if (out.converged_count > 1) {
      for (const auto& record : out.records) {
        if (!record.converged) continue;
        for (size_t j = 0; j < out.terms.size(); ++j) {
          const double d = record.coef[j] - out.coef_mean[j];
          out.coef_sd[j] += d * d;
        }
      }
      for (auto& v : out.coef_sd)
        v = std::sqrt(v / static_cast<double>(out.converged_count - 1));
    }
  }
  return out;
}

LinearFit ols_fit(const FeatureMatrix& x, const std::vector<double>& y) {
  const size_t n = x.n();
  if (y.size() != n) throw Error(Errc::bad_config, "response length does not match rows");
  const auto p1 = static_cast<Index>(x.p()) + 1;
  if (static_cast<Index>(n) <= p1)
    throw Error(Errc::bad_config, "ols needs n > p + 1");

  const Eigen::MatrixXd design = design_matrix(x);
  Eigen::VectorXd yv(static_cast<Index>(n));
  for (size_t i = 0; i < n; ++i) yv(static_cast<Index>(i)) = y[i];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p1) throw Error(Errc::singular_design, "design matrix is rank deficient");
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - design * beta;
  const double rss = resid.squaredNorm();
  const double ybar = yv.mean();
  const double tss = (yv.array() - ybar).square().sum();

  LinearFit fit;
  fit.terms = term_names(x);
  fit.n = n;
  fit.df_residual = static_cast<int>(static_cast<Index>(n) - p1);
  const double sigma2 = rss / fit.df_residual;
  fit.residual_se = std::sqrt(sigma2);
  fit.r2 = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 0.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (static_cast<double>(n) - 1.0) / fit.df_residual;

  const Eigen::MatrixXd xtx = design.transpose() * design;
  const Eigen::MatrixXd cov = sigma2 * xtx.ldlt().solve(Eigen::MatrixXd::Identity(p1, p1));
  boost::math::students_t tdist(fit.df_residual);
  fit.coef.resize(static_cast<size_t>(p1));
  fit.se.resize(static_cast<size_t>(p1));
  fit.t.resize(static_cast<size_t>(p1));
  fit.p.resize(static_cast<size_t>(p1));
  for (Index j = 0; j < p1; ++j) {
    fit.coef[static_cast<size_t>(j)] = beta(j);
    fit.se[static_cast<size_t>(j)] = std::sqrt(std::max(cov(j, j), 0.0));
    const double t = fit.se[static_cast<size_t>(j)] > 0.0 ? beta(j) / fit.se[static_cast<size_t>(j)] : 0.0;
    fit.t[static_cast<size_t>(j)] = t;
    fit.p[static_cast<size_t>(j)] = 2.0 * boost::math::cdf(tdist, -std::abs(t));
  }

  if (x.p() > 0 && rss > 0.0 && tss > rss) {
    fit.f_stat = ((tss - rss) / static_cast<double>(x.p())) / sigma2;
    boost::math::fisher_f fdist(static_cast<double>(x.p()), fit.df_residual);
    fit.f_pvalue = boost::math::cdf(boost::math::complement(fdist, fit.f_stat));
  } else if (x.p() > 0 && rss == 0.0) {
    fit.f_stat = std::numeric_limits<double>::infinity();
    fit.f_pvalue = 0.0;
  }
  return fit;
}

std::vector<SubsetFit> best_subset(const FeatureMatrix& x, const std::vector<double>& y,
                                   int max_size) {
  const auto p = static_cast<int>(x.p());
  if (p > 20) throw Error(Errc::too_many_features, "exhaustive subset search is capped at 20 features");
  if (p == 0 || max_size < 1) throw Error(Errc::bad_config, "need at least one feature");
  const size_t n = x.n();
  if (y.size() != n) throw Error(Errc::bad_config, "response length does not match rows");
  max_size = std::min(max_size, p);
  if (n <= static_cast<size_t>(max_size) + 1)
    throw Error(Errc::bad_config, "best subset needs n > max_size + 1");

  // Centered Gram products make each subset solve O(s^3) with no data pass.
  Eigen::MatrixXd xc(static_cast<Index>(n), p);
  for (Index j = 0; j < p; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += x.values[i][static_cast<size_t>(j)];
    mean /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i)
      xc(static_cast<Index>(i), j) = x.values[i][static_cast<size_t>(j)] - mean;
  }
  Eigen::VectorXd yc(static_cast<Index>(n));
  double ybar = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) yc(static_cast<Index>(i)) = y[i] - ybar;
  const Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd xty = xc.transpose() * yc;
  const double tss = yc.squaredNorm();

  std::vector<int> name_order(static_cast<size_t>(p));
  std::iota(name_order.begin(), name_order.end(), 0);
  std::sort(name_order.begin(), name_order.end(), [&](int a, int b) {
    return x.columns[static_cast<size_t>(a)] < x.columns[static_cast<size_t>(b)];
  });

  std::vector<SubsetFit> out;
  std::vector<int> combo;
  for (int s = 1; s <= max_size; ++s) {
    combo.assign(static_cast<size_t>(s), 0);
    std::iota(combo.begin(), combo.end(), 0);
    double best_rss = std::numeric_limits<double>::infinity();
    std::vector<int> best_combo;
    Eigen::MatrixXd gs(s, s);
    Eigen::VectorXd gy(s);
    while (true) {
      for (int a = 0; a < s; ++a) {
        const int ca = name_order[static_cast<size_t>(combo[static_cast<size_t>(a)])];
        gy(a) = xty(ca);
        for (int b = 0; b < s; ++b)
          gs(a, b) = gram(ca, name_order[static_cast<size_t>(combo[static_cast<size_t>(b)])]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(gs);
      double rss;
      if (llt.info() == Eigen::Success) {
        rss = tss - gy.dot(llt.solve(gy));
      } else {
        rss = tss - gy.dot(gs.ldlt().solve(gy));
      }
      rss = std::max(rss, 0.0);
      if (rss < best_rss) {
        best_rss = rss;
        best_combo = combo;
      }
      // next lexicographic combination
      int i = s - 1;
      while (i >= 0 && combo[static_cast<size_t>(i)] == p - s + i) --i;
      if (i < 0) break;
      ++combo[static_cast<size_t>(i)];
      for (int j = i + 1; j < s; ++j)
        combo[static_cast<size_t>(j)] = combo[static_cast<size_t>(j - 1)] + 1;
    }
    SubsetFit fit;
    fit.rss = best_rss;
    for (int idx : best_combo)
      fit.features.push_back(x.columns[static_cast<size_t>(name_order[static_cast<size_t>(idx)])]);
    out.push_back(std::move(fit));
  }
  return out;
}

FunctionalFit function_on_scalar_fit(const TrajectoryGrid& grid, const FeatureMatrix& x,
                                     std::optional<double> smoothing_bandwidth) {
  const size_t n = grid.firm_ids.size();
  if (x.n() != n)
    throw Error(Errc::bad_config, "feature rows and grid rows must cover the same firms");
  std::map<std::string, size_t> x_row;
  for (size_t i = 0; i < n; ++i) x_row.emplace(x.row_ids[i], i);
  std::vector<size_t> align(n);
  for (size_t i = 0; i < n; ++i) {
    auto it = x_row.find(grid.firm_ids[i]);
    if (it == x_row.end())
      throw Error(Errc::bad_config, "firm '" + grid.firm_ids[i] + "' has no feature row");
    align[i] = it->second;
  }
  const auto p1 = static_cast<Index>(x.p()) + 1;
  if (static_cast<Index>(n) <= p1)
    throw Error(Errc::bad_config, "function-on-scalar fit needs n > p + 1");

  Eigen::MatrixXd design(static_cast<Index>(n), p1);
  design.col(0).setOnes();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < x.p(); ++j)
      design(static_cast<Index>(i), static_cast<Index>(j) + 1) = x.values[align[i]][j];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p1) throw Error(Errc::singular_design, "design matrix is rank deficient");
  const Eigen::MatrixXd xtx = design.transpose() * design;
  const Eigen::VectorXd inv_diag =
      xtx.ldlt().solve(Eigen::MatrixXd::Identity(p1, p1)).diagonal();
  const double df = static_cast<double>(static_cast<Index>(n) - p1);

  FunctionalFit fit;
  fit.grid = grid.grid;
  fit.terms = term_names(x);
  fit.n = n;
  fit.coef.assign(static_cast<size_t>(p1), std::vector<double>(grid.grid.size(), 0.0));
  fit.se.assign(static_cast<size_t>(p1), std::vector<double>(grid.grid.size(), 0.0));

  Eigen::VectorXd yt(static_cast<Index>(n));
  for (size_t g = 0; g < grid.grid.size(); ++g) {
    for (size_t i = 0; i < n; ++i) yt(static_cast<Index>(i)) = grid.rows[i][g];
    const Eigen::VectorXd beta = qr.solve(yt);
    const double rss = (yt - design * beta).squaredNorm();
    const double sigma2 = rss / df;
    for (Index j = 0; j < p1; ++j) {
      fit.coef[static_cast<size_t>(j)][g] = beta(j);
      fit.se[static_cast<size_t>(j)][g] = std::sqrt(std::max(sigma2 * inv_diag(j), 0.0));
    }
  }

  if (smoothing_bandwidth && *smoothing_bandwidth > 0.0) {
    const double h = *smoothing_bandwidth;
    for (auto& curve : fit.coef) {
      std::vector<double> smooth(curve.size(), 0.0);
      for (size_t g = 0; g < curve.size(); ++g) {
        double num = 0.0, den = 0.0;
        for (size_t s = 0; s < curve.size(); ++s) {
          const double u = (fit.grid[s] - fit.grid[g]) / h;
          const double kernel = std::exp(-0.5 * u * u);
          num += kernel * curve[s];
          den += kernel;
        }
        smooth[g] = num / den;
      }
      curve = std::move(smooth);
    }
  }
  return fit;
}

void write_functional_csv(std::ostream& out, const FunctionalFit& fit) {
  write_csv_record(out, std::vector<std::string>{"term", "t", "estimate", "se", "lower", "upper"});
  for (size_t j = 0; j < fit.terms.size(); ++j) {
    for (size_t g = 0; g < fit.grid.size(); ++g) {
      const double est = fit.coef[j][g], se = fit.se[j][g];
      write_csv_record(out, std::vector<std::string>{
                                fit.terms[j], format_double(fit.grid[g]), format_double(est),
                                format_double(se), format_double(est - fit.band_z * se),
                                format_double(est + fit.band_z * se)});
    }
  }
}

void write_resampling_csv(std::ostream& out, const ResamplingSummary& summary) {
  write_csv_record(out, std::vector<std::string>{"repetition", "term", "coefficient", "neg_log_p",
                                                 "converged"});
  for (size_t rep = 0; rep < summary.records.size(); ++rep) {
    const auto& record = summary.records[rep];
    for (size_t j = 0; j < summary.terms.size(); ++j) {
      const double p = j < record.p.size() ? record.p[j] : std::numeric_limits<double>::quiet_NaN();
      write_csv_record(out, std::vector<std::string>{
                                std::to_string(rep), summary.terms[j],
                                format_double(j < record.coef.size()
                                                  ? record.coef[j]
                                                  : std::numeric_limits<double>::quiet_NaN()),
                                format_double(-std::log(p)), record.converged ? "1" : "0"});
    }
  }
}

} // namespace vcnet
