#include "vcnet/stats.hpp"

#include "vcnet/error.hpp"
#include "vcnet/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace vcnet;

namespace {

FeatureMatrix matrix_of(const std::vector<std::string>& columns,
                        const std::vector<std::vector<double>>& values) {
  FeatureMatrix m;
  m.columns = columns;
  m.values = values;
  for (size_t i = 0; i < values.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "r%04zu", i);
    m.row_ids.emplace_back(buf);
  }
  for (const auto& c : columns) m.transforms[c] = Transform::none;
  return m;
}

FeatureMatrix random_matrix(std::mt19937_64& rng, size_t n, size_t p) {
  std::vector<std::vector<double>> values(n, std::vector<double>(p));
  for (auto& row : values)
    for (auto& v : row) v = normal01(rng);
  std::vector<std::string> columns;
  for (size_t j = 0; j < p; ++j) columns.push_back("x" + std::to_string(j));
  return matrix_of(columns, values);
}

} // namespace

TEST_SUITE("stats") {

TEST_CASE("feature matrix keeps only complete rows") {
  std::vector<FirmFeatureVector> rows(3);
  rows[0].firm_id = "f1";
  rows[0].features["a"] = 1.0;
  rows[0].features["b"] = 2.0;
  rows[1].firm_id = "f2";
  rows[1].features["a"] = 3.0;
  rows[1].features["b"] = std::nullopt;
  rows[2].firm_id = "f3";
  rows[2].features["a"] = 5.0;
  rows[2].features["b"] = 6.0;

  const auto build = build_feature_matrix(rows, {"a", "b"});
  CHECK(build.excluded_rows == 1);
  CHECK(build.matrix.row_ids == std::vector<std::string>{"f1", "f3"});
  CHECK(build.matrix.columns == std::vector<std::string>{"a", "b"});
  CHECK(build.matrix.values == std::vector<std::vector<double>>{{1.0, 2.0}, {5.0, 6.0}});
  CHECK(build.matrix.column_index("b") == 1);
  CHECK(build.matrix.column_index("zz") == -1);
}

TEST_CASE("transforms: log1p then z-score, constant columns rejected") {
  auto m = matrix_of({"a", "b"}, {{0.0, 1.0}, {std::exp(1.0) - 1.0, 2.0}, {std::exp(2.0) - 1.0, 6.0}});
  TransformPolicy policy;
  policy.log1p_columns = {"a"};
  const auto t = apply_transforms(m, policy);

  for (size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (const auto& row : t.values) mean += row[j];
    mean /= 3.0;
    double var = 0.0;
    for (const auto& row : t.values) var += (row[j] - mean) * (row[j] - mean);
    var /= 2.0; // sample variance
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - 1.0) < 1e-12);
  }
  // log1p of column a gives {0, 1, 2}: equally spaced, so after z-scoring the
  // middle row sits exactly at 0.
  CHECK(t.values[1][0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.transforms.at("a") == Transform::log1p_then_zscore);
  CHECK(t.transforms.at("b") == Transform::zscore);

  auto constant = matrix_of({"c"}, {{1.0}, {1.0}, {1.0}});
  CHECK_THROWS_AS(apply_transforms(constant, {}), Error);
  try {
    apply_transforms(constant, {});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::constant_column);
    CHECK(std::string(e.what()).find("c") != std::string::npos);
  }
}

TEST_CASE("dedup merges perfect correlation at height zero") {
  std::mt19937_64 rng(42);
  std::vector<std::vector<double>> values;
  for (int i = 0; i < 30; ++i) {
    const double x = normal01(rng);
    values.push_back({x, 2.0 * x, normal01(rng)});
  }
  const auto m = matrix_of({"x", "xx", "z"}, values);
  const auto dd = correlation_dedup(m, 2);
  REQUIRE(dd.clusters.size() == 2);
  const std::vector<std::string> pair{"x", "xx"};
  const bool first_is_pair = dd.clusters[0] == pair;
  CHECK((first_is_pair ? dd.clusters[1] : dd.clusters[0]) == std::vector<std::string>{"z"});
  CHECK((first_is_pair ? dd.clusters[0] : dd.clusters[1]) == pair);
  // Representatives: one of {x, xx} plus z, reported in column order.
  REQUIRE(dd.selected.size() == 2);
  CHECK((dd.selected[0] == "x" || dd.selected[0] == "xx"));
  CHECK(dd.selected[1] == "z");
  // The x-xx merge happened at height ~0.
  REQUIRE(dd.tree.nodes.size() == 5); // 3 leaves + 2 merges
  CHECK(dd.tree.nodes[3].height == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("dedup with k equal to feature count returns every feature") {
  std::mt19937_64 rng(7);
  const auto m = random_matrix(rng, 25, 4);
  const auto dd = correlation_dedup(m, 4);
  CHECK(dd.selected == m.columns);
  CHECK(dd.clusters.size() == 4);
}

TEST_CASE("anti-correlated pair merges last under 1 - r") {
  std::mt19937_64 rng(9);
  std::vector<std::vector<double>> values;
  for (int i = 0; i < 40; ++i) {
    const double x = normal01(rng);
    const double z = 0.9 * x + 0.1 * normal01(rng); // strongly positively tied to x
    values.push_back({x, -x, z});
  }
  const auto m = matrix_of({"a", "anti", "near"}, values);
  const auto dd = correlation_dedup(m, 1);
  // Root merge height: complete linkage to the anti-correlated column is 2.
  CHECK(dd.tree.nodes.back().height == doctest::Approx(2.0).epsilon(1e-9));

  // Under 1 - |r| the anti-correlated pair is distance ~0 instead.
  const auto dd_abs = correlation_dedup(m, 2, CorrelationDistance::one_minus_abs_r);
  bool found_pair = false;
  for (const auto& cluster : dd_abs.clusters)
    if (cluster == std::vector<std::string>{"a", "anti"}) found_pair = true;
  CHECK(found_pair);
}

TEST_CASE("logistic: intercept-only model explains no deviance") {
  FeatureMatrix empty;
  empty.row_ids = {"r1", "r2", "r3", "r4"};
  const std::vector<int> y{0, 1, 1, 0};
  const auto fit = logistic_fit(empty, y);
  CHECK(fit.terms == std::vector<std::string>{"(intercept)"});
  CHECK(fit.deviance_explained == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.converged);
  CHECK(fit.coef[0] == doctest::Approx(0.0).epsilon(1e-9)); // balanced classes
}

TEST_CASE("logistic matches the Newton oracle on random problems") {
  std::mt19937_64 rng(20240815ull);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 80;
    const size_t p = 2;
    std::vector<std::vector<double>> x(n, std::vector<double>(p));
    std::vector<int> y(n);
    const double b0 = normal01(rng) * 0.5;
    const double b1 = normal01(rng);
    const double b2 = normal01(rng);
    for (size_t i = 0; i < n; ++i) {
      x[i][0] = normal01(rng);
      x[i][1] = normal01(rng);
      const double eta = b0 + b1 * x[i][0] + b2 * x[i][1];
      y[i] = uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0)
      continue;
    const auto m = matrix_of({"x1", "x2"}, x);
    const auto fit = logistic_fit(m, y);
    const auto want = oracle::newton_logistic(x, y);
    if (!fit.converged || !want.converged) continue;
    REQUIRE(fit.coef.size() == want.coef.size());
    for (size_t j = 0; j < fit.coef.size(); ++j)
      CHECK(fit.coef[j] == doctest::Approx(want.coef[j]).epsilon(1e-6));
    CHECK(fit.n == n);
    CHECK(fit.residual_deviance <= fit.null_deviance + 1e-9);
  }
}

TEST_CASE("logistic flags separation instead of throwing") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back({static_cast<double>(i)});
    y.push_back(i < 5 ? 0 : 1);
  }
  const auto m = matrix_of({"x"}, x);
  const auto fit = logistic_fit(m, y);
  CHECK(fit.separation);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("logistic rejects degenerate inputs") {
  auto m = matrix_of({"a", "b"}, {{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}, {4.0, 8.0}});
  CHECK_THROWS_AS(logistic_fit(m, {0, 1, 0, 1}), Error);
  try {
    logistic_fit(m, {0, 1, 0, 1});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular_design);
  }

  auto ok = matrix_of({"a"}, {{1.0}, {2.0}, {3.0}, {4.0}});
  CHECK_THROWS_AS(logistic_fit(ok, {1, 1, 1, 1}), Error);
  try {
    logistic_fit(ok, {1, 1, 1, 1});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_config);
  }
}

TEST_CASE("likelihood-ratio p-value behaves like a p-value") {
  std::mt19937_64 rng(5150);
  const size_t n = 200;
  std::vector<std::vector<double>> x(n, std::vector<double>(1));
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) {
    x[i][0] = normal01(rng);
    const double eta = 1.5 * x[i][0];
    y[i] = uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
  }
  const auto m = matrix_of({"x"}, x);
  const auto full = logistic_fit(m, y);
  FeatureMatrix empty;
  empty.row_ids = m.row_ids;
  const auto reduced = logistic_fit(empty, y);
  const double p = logistic_lr_pvalue(full, reduced);
  CHECK(p >= 0.0);
  CHECK(p < 1e-6); // strong planted effect
}

TEST_CASE("balanced resampling keeps twice the minority per repetition") {
  std::mt19937_64 rng(31337);
  const size_t minority = 89;
  const size_t majority = 600;
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (size_t i = 0; i < minority + majority; ++i) {
    const int label = i < minority ? 1 : 0;
    x.push_back({normal01(rng) + (label == 1 ? 0.8 : 0.0)});
    y.push_back(label);
  }
  const auto m = matrix_of({"x"}, x);
  const auto summary = balanced_resampling(m, y, 50, 2024);
  CHECK(summary.rows_per_repetition == 178);
  CHECK(summary.records.size() == 50);
  CHECK(summary.converged_count > 0);
  CHECK(summary.terms == std::vector<std::string>{"(intercept)", "x"});
  REQUIRE(summary.coef_mean.size() == 2);
  CHECK(summary.coef_mean[1] > 0.0); // planted positive shift

  const auto again = balanced_resampling(m, y, 50, 2024);
  for (size_t r = 0; r < summary.records.size(); ++r)
    CHECK(summary.records[r].coef == again.records[r].coef);

  const auto other = balanced_resampling(m, y, 50, 2025);
  bool any_difference = false;
  for (size_t r = 0; r < summary.records.size(); ++r)
    if (summary.records[r].coef != other.records[r].coef) any_difference = true;
  CHECK(any_difference);
}

TEST_CASE("ols recovers a noiseless line exactly") {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    x.push_back({static_cast<double>(i)});
    y.push_back(1.0 + 2.0 * i);
  }
  const auto m = matrix_of({"x"}, x);
  const auto fit = ols_fit(m, y);
  CHECK(fit.coef[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.coef[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.df_residual == 10);
}

TEST_CASE("ols matches the normal-equations oracle") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 10; ++trial) {
    const size_t n = 40;
    std::vector<std::vector<double>> x(n, std::vector<double>(3));
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) {
      for (auto& v : x[i]) v = normal01(rng);
      y[i] = 0.5 - x[i][0] + 2.0 * x[i][2] + 0.3 * normal01(rng);
    }
    const auto m = matrix_of({"a", "b", "c"}, x);
    const auto fit = ols_fit(m, y);
    std::vector<double> coef, se;
    oracle::pointwise_ols(x, y, coef, se);
    for (size_t j = 0; j < coef.size(); ++j) {
      CHECK(fit.coef[j] == doctest::Approx(coef[j]).epsilon(1e-10));
      CHECK(fit.se[j] == doctest::Approx(se[j]).epsilon(1e-10));
    }
    CHECK(fit.f_pvalue >= 0.0);
    CHECK(fit.f_pvalue <= 1.0);
  }
}

TEST_CASE("ols rejects tiny samples and collinear designs") {
  auto tiny = matrix_of({"a"}, {{1.0}, {2.0}});
  CHECK_THROWS_AS(ols_fit(tiny, {1.0, 2.0}), Error);
  try {
    ols_fit(tiny, {1.0, 2.0});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_config);
  }

  auto collinear = matrix_of({"a", "b"}, {{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}, {4.0, 8.0}, {5.0, 10.0}});
  CHECK_THROWS_AS(ols_fit(collinear, {1.0, 2.0, 3.0, 4.0, 5.0}), Error);
  try {
    ols_fit(collinear, {1.0, 2.0, 3.0, 4.0, 5.0});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::singular_design);
  }
}

TEST_CASE("best subset finds the single true signal") {
  std::mt19937_64 rng(123);
  const size_t n = 30;
  std::vector<std::vector<double>> x(n, std::vector<double>(3));
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    for (auto& v : x[i]) v = normal01(rng);
    y[i] = 4.0 * x[i][1]; // depends on x2 only, noiseless
  }
  const auto m = matrix_of({"x1", "x2", "x3"}, x);
  const auto fits = best_subset(m, y, 2);
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].features == std::vector<std::string>{"x2"});
  CHECK(fits[0].rss == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("best subset equals the exhaustive oracle at p = 10") {
  std::mt19937_64 rng(192837);
  const size_t n = 60;
  const size_t p = 10;
  std::vector<std::vector<double>> x(n, std::vector<double>(p));
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    for (auto& v : x[i]) v = normal01(rng);
    y[i] = 1.0 + 2.0 * x[i][1] - x[i][4] + 0.5 * x[i][7] + 0.5 * normal01(rng);
  }
  std::vector<std::string> columns;
  for (size_t j = 0; j < p; ++j) columns.push_back("f" + std::to_string(j));
  const auto m = matrix_of(columns, x);
  const auto fits = best_subset(m, y, 4);
  const auto want = oracle::best_subset_qr(m, y, 4);
  REQUIRE(fits.size() == want.size());
  for (size_t s = 0; s < fits.size(); ++s) {
    CHECK(fits[s].features == want[s].features);
    CHECK(fits[s].rss == doctest::Approx(want[s].rss).epsilon(1e-9));
  }
}

TEST_CASE("best subset refuses more than 20 features") {
  std::mt19937_64 rng(4);
  const auto m = random_matrix(rng, 40, 21);
  std::vector<double> y(40, 0.0);
  for (auto& v : y) v = normal01(rng);
  CHECK_THROWS_AS(best_subset(m, y, 2), Error);
  try {
    best_subset(m, y, 2);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_many_features);
  }
}

TEST_CASE("function-on-scalar: constant-in-t response reduces to scalar ols") {
  const size_t n = 25;
  std::mt19937_64 rng(10);
  TrajectoryGrid grid;
  for (int i = 0; i <= 100; ++i) grid.grid.push_back(0.1 * i);
  FeatureMatrix m;
  m.columns = {"x"};
  for (size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "f%03zu", i);
    const double x = normal01(rng);
    m.row_ids.emplace_back(buf);
    m.values.push_back({x});
    grid.firm_ids.emplace_back(buf);
    grid.rows.emplace_back(grid.grid.size(), 2.0 + 3.0 * x);
  }
  m.transforms["x"] = Transform::none;
  const auto fit = function_on_scalar_fit(grid, m);
  REQUIRE(fit.terms == std::vector<std::string>{"(intercept)", "x"});
  for (size_t gpt = 0; gpt < fit.grid.size(); ++gpt) {
    CHECK(fit.coef[0][gpt] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.coef[1][gpt] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.se[1][gpt] == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("function-on-scalar equals pointwise ols at every grid point") {
  std::mt19937_64 rng(24680);
  const size_t n = 30;
  TrajectoryGrid grid;
  for (int i = 0; i <= 20; ++i) grid.grid.push_back(0.5 * i);
  FeatureMatrix m;
  m.columns = {"u", "v"};
  std::vector<std::vector<double>> x(n, std::vector<double>(2));
  for (size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "f%03zu", i);
    x[i][0] = normal01(rng);
    x[i][1] = normal01(rng);
    m.row_ids.emplace_back(buf);
    m.values.push_back(x[i]);
    std::vector<double> row;
    for (double t : grid.grid)
      row.push_back(0.3 * t + x[i][0] * std::sin(t) + x[i][1] + 0.2 * normal01(rng));
    grid.firm_ids.emplace_back(buf);
    grid.rows.push_back(std::move(row));
  }
  m.transforms["u"] = m.transforms["v"] = Transform::none;
  const auto fit = function_on_scalar_fit(grid, m);
  REQUIRE(fit.grid.size() == 21);
  for (size_t gpt = 0; gpt < fit.grid.size(); ++gpt) {
    std::vector<double> y;
    for (size_t i = 0; i < n; ++i) y.push_back(grid.rows[i][gpt]);
    std::vector<double> coef, se;
    oracle::pointwise_ols(x, y, coef, se);
    for (size_t j = 0; j < coef.size(); ++j) {
      CHECK(fit.coef[j][gpt] == doctest::Approx(coef[j]).epsilon(1e-10));
      CHECK(fit.se[j][gpt] == doctest::Approx(se[j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("function-on-scalar matches rows by firm id") {
  TrajectoryGrid grid;
  grid.grid = {0.0, 1.0};
  grid.firm_ids = {"d", "b", "a", "c"};
  grid.rows = {{26.0, 26.0}, {10.0, 10.0}, {2.0, 2.0}, {18.0, 18.0}};
  FeatureMatrix m;
  m.columns = {"x"};
  m.row_ids = {"a", "b", "c", "d"};
  m.values = {{0.0}, {1.0}, {2.0}, {3.0}};
  m.transforms["x"] = Transform::none;
  // y = 2 + 8x at both grid points once rows are aligned by id.
  const auto fit = function_on_scalar_fit(grid, m);
  CHECK(fit.coef[0][0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit.coef[1][0] == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("smoothing flattens wiggles without changing the average level") {
  std::mt19937_64 rng(555);
  const size_t n = 40;
  TrajectoryGrid grid;
  for (int i = 0; i <= 100; ++i) grid.grid.push_back(0.1 * i);
  FeatureMatrix m;
  m.columns = {"x"};
  std::vector<double> xs(n);
  for (size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "f%03zu", i);
    xs[i] = normal01(rng);
    m.row_ids.emplace_back(buf);
    m.values.push_back({xs[i]});
    std::vector<double> row;
    for (double t : grid.grid) row.push_back(xs[i] * t + 2.0 * normal01(rng));
    grid.firm_ids.emplace_back(buf);
    grid.rows.push_back(std::move(row));
  }
  m.transforms["x"] = Transform::none;
  const auto rough = function_on_scalar_fit(grid, m);
  const auto smooth = function_on_scalar_fit(grid, m, 0.5);

  auto wiggle = [](const std::vector<double>& curve) {
    double sum = 0.0;
    for (size_t i = 1; i + 1 < curve.size(); ++i)
      sum += std::abs(curve[i + 1] - 2.0 * curve[i] + curve[i - 1]);
    return sum;
  };
  CHECK(wiggle(smooth.coef[1]) < wiggle(rough.coef[1]));
  double rough_mean = 0.0, smooth_mean = 0.0;
  for (size_t i = 0; i < rough.coef[1].size(); ++i) {
    rough_mean += rough.coef[1][i];
    smooth_mean += smooth.coef[1][i];
  }
  CHECK(smooth_mean / 101.0 == doctest::Approx(rough_mean / 101.0).epsilon(0.05));
}

TEST_CASE("functional and resampling csv layouts") {
  TrajectoryGrid grid;
  grid.grid = {0.0, 1.0};
  grid.firm_ids = {"a", "b", "c", "d"};
  grid.rows = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}, {3.0, 5.0}};
  FeatureMatrix m;
  m.columns = {"x"};
  m.row_ids = {"a", "b", "c", "d"};
  m.values = {{0.0}, {1.0}, {2.0}, {3.1}};
  m.transforms["x"] = Transform::none;
  const auto fit = function_on_scalar_fit(grid, m);
  std::ostringstream out;
  write_functional_csv(out, fit);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "term,t,estimate,se,lower,upper");
  REQUIRE(std::getline(in, line));
  CHECK(line.find("(intercept),0,") == 0);

  ResamplingSummary summary;
  summary.terms = {"(intercept)", "x"};
  ResamplingRecord rec;
  rec.coef = {0.5, 1.5};
  rec.p = {std::exp(-1.0), 0.01};
  rec.converged = true;
  summary.records.push_back(rec);
  std::ostringstream rout;
  write_resampling_csv(rout, summary);
  std::istringstream rin(rout.str());
  REQUIRE(std::getline(rin, line));
  CHECK(line == "repetition,term,coefficient,neg_log_p,converged");
  REQUIRE(std::getline(rin, line));
  CHECK(line.find("0,(intercept),0.5,") == 0); // neg_log_p is the natural log
  CHECK(line.back() == '1');
  const double neg_log_p = std::stod(line.substr(line.find("0.5,") + 4));
  CHECK(neg_log_p == doctest::Approx(1.0).epsilon(1e-12));
}

} // TEST_SUITE
