#include "vcnet/synth.hpp"

#include "vcnet/error.hpp"
#include "vcnet/ingest.hpp"
#include "vcnet/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace vcnet;

namespace {

std::string serialize(const Dataset& d) {
  std::ostringstream out;
  write_deals(out, d.deals);
  std::vector<FirmRecord> firms;
  for (const auto& [id, rec] : d.firms) firms.push_back(rec);
  write_firms(out, firms);
  std::vector<InvestorRecord> investors;
  for (const auto& [id, rec] : d.investors) investors.push_back(rec);
  write_investors(out, investors);
  return out.str();
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("same seed twice gives bit-identical datasets") {
  SynthConfig cfg;
  cfg.seed = 4242;
  cfg.n_firms = 150;
  cfg.n_investors = 40;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  CHECK(serialize(a.data) == serialize(b.data));
  std::ostringstream ta, tb;
  write_ground_truth(ta, a.truth);
  write_ground_truth(tb, b.truth);
  CHECK(ta.str() == tb.str());

  SynthConfig other = cfg;
  other.seed = 4243;
  CHECK(serialize(generate(other).data) != serialize(a.data));
}

TEST_CASE("generated data validates cleanly") {
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.n_firms = 200;
  cfg.n_investors = 50;
  cfg.high_regime_fraction = 0.25;
  cfg.gamma = 0.5;
  const auto result = generate(cfg);
  CHECK(validate_dataset(result.data).empty());
  CHECK(result.data.firms.size() == 200);
  CHECK(result.data.investors.size() == 50);
  for (const auto& [id, firm] : result.data.firms) {
    CHECK(firm.birth_year.has_value());
    CHECK(firm.subsector.has_value());
  }
}

TEST_CASE("deal count concentrates around firms times expected rows") {
  SynthConfig cfg;
  cfg.seed = 1001;
  cfg.n_firms = 500;
  cfg.rounds_mean = 3.0;
  const auto result = generate(cfg);
  // Rows per firm are 1 + Poisson(2): mean 1500, sd sqrt(500 * 2).
  const double sd = std::sqrt(500.0 * 2.0);
  CHECK(std::abs(static_cast<double>(result.data.deals.size()) - 1500.0) <= 3.0 * sd);
}

TEST_CASE("truth table is one row per firm in id order") {
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.n_firms = 120;
  cfg.high_regime_fraction = 0.3;
  cfg.gamma = 0.25;
  const auto result = generate(cfg);
  REQUIRE(result.truth.size() == 120);
  for (size_t i = 1; i < result.truth.size(); ++i)
    CHECK(result.truth[i - 1].firm_id < result.truth[i].firm_id);
  size_t high = 0;
  for (const auto& t : result.truth) {
    CHECK(result.data.firms.count(t.firm_id) == 1);
    if (t.high_regime) ++high;
    CHECK(t.effect_component >= 0.0);
    CHECK(t.effect_component <= cfg.gamma + 1e-12);
  }
  CHECK(high > 10);
  CHECK(high < 110);
}

TEST_CASE("null configuration plants nothing") {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.n_firms = 80;
  cfg.gamma = 0.0;
  cfg.high_regime_fraction = 0.0;
  const auto result = generate(cfg);
  for (const auto& t : result.truth) {
    CHECK_FALSE(t.high_regime);
    CHECK(t.effect_component == 0.0);
  }
}

TEST_CASE("high regime scales terminal funding") {
  SynthConfig base;
  base.seed = 31;
  base.n_firms = 400;
  base.amount_sigma = 0.0; // isolate the regime effect
  base.high_regime_fraction = 0.5;
  base.high_regime_ratio = 10.0;
  const auto result = generate(base);
  std::map<std::string, double> totals;
  for (const auto& deal : result.data.deals) totals[deal.firm_id] += deal.amount_usd;
  double high_sum = 0.0, low_sum = 0.0;
  size_t high_n = 0, low_n = 0;
  for (const auto& t : result.truth) {
    // Deals past the year span are date-pinned but keep their amounts, so
    // totals equal the planted firm total exactly.
    const double total = totals[t.firm_id];
    if (t.high_regime) {
      high_sum += total;
      ++high_n;
    } else {
      low_sum += total;
      ++low_n;
    }
  }
  REQUIRE(high_n > 50);
  REQUIRE(low_n > 50);
  const double ratio = (high_sum / static_cast<double>(high_n)) /
                       (low_sum / static_cast<double>(low_n));
  CHECK(ratio > 5.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("ground truth csv layout") {
  SynthConfig cfg;
  cfg.seed = 2;
  cfg.n_firms = 3;
  cfg.n_investors = 5;
  const auto result = generate(cfg);
  std::ostringstream out;
  write_ground_truth(out, result.truth);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "firm_id,true_regime,true_effect_component");
  REQUIRE(std::getline(in, line));
  CHECK(line.find("F1,") == 0);
}

TEST_CASE("config validation rejects nonsense") {
  auto expect_bad = [](auto mutate) {
    SynthConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(validate_synth_config(cfg), Error);
    try {
      validate_synth_config(cfg);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::bad_config);
    }
  };
  expect_bad([](SynthConfig& c) { c.n_firms = 0; });
  expect_bad([](SynthConfig& c) { c.n_investors = 0; });
  expect_bad([](SynthConfig& c) { c.last_year = c.first_year - 1; });
  expect_bad([](SynthConfig& c) { c.rounds_mean = 0.5; });
  expect_bad([](SynthConfig& c) { c.round_join_prob = 1.0; });
  expect_bad([](SynthConfig& c) { c.high_regime_fraction = 1.5; });
  expect_bad([](SynthConfig& c) { c.high_regime_ratio = 0.0; });
  expect_bad([](SynthConfig& c) { c.amount_sigma = -1.0; });
  expect_bad([](SynthConfig& c) { c.pa_strength = -0.1; });
  expect_bad([](SynthConfig& c) { c.n_subsectors = 0; });
}

TEST_CASE("zero gamma keeps terminals independent of degree") {
  SynthConfig cfg;
  cfg.seed = 8080;
  cfg.n_firms = 300;
  cfg.gamma = 0.0;
  const auto result = generate(cfg);
  for (const auto& t : result.truth) CHECK(t.effect_component == 0.0);
}

} // TEST_SUITE
