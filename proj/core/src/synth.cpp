#include "vcnet/synth.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"
#include "vcnet/ingest.hpp"
#include "vcnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <vector>

namespace vcnet {

namespace {

constexpr const char* kSubsectors[] = {
    "biotech",      "medical_devices", "health_it",  "diagnostics",
    "pharma",       "digital_health",  "genomics",   "care_delivery",
    "telehealth",   "imaging",         "lab_tools",  "health_insurance",
};

struct CountryWeight {
  const char* name;
  double weight;
};

constexpr CountryWeight kCountries[] = {
    {"United States", 0.45}, {"United Kingdom", 0.10}, {"China", 0.08},
    {"Germany", 0.07},       {"France", 0.06},         {"Israel", 0.06},
    {"Canada", 0.06},        {"India", 0.05},          {"Sweden", 0.04},
    {"Japan", 0.03},
};

std::string padded_id(char prefix, int index, int width) {
  std::string digits = std::to_string(index + 1);
  std::string out(1, prefix);
  out.append(static_cast<size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0');
  out += digits;
  return out;
}

int id_width(int count) {
  int width = 1;
  while (count >= 10) {
    count /= 10;
    ++width;
  }
  return width;
}

std::string subsector_name(int index) {
  constexpr int known = static_cast<int>(std::size(kSubsectors));
  if (index < known) return kSubsectors[index];
  return "sector" + std::to_string(index + 1);
}

std::string round_label(int index) {
  if (index < 26) return std::string(1, static_cast<char>('A' + index));
  return "R" + std::to_string(index + 1);
}

const char* pick_country(std::mt19937_64& rng) {
  double u = uniform01(rng);
  for (const auto& c : kCountries) {
    if (u < c.weight) return c.name;
    u -= c.weight;
  }
  return kCountries[0].name;
}

FirmStatus pick_status(std::mt19937_64& rng) {
  const double u = uniform01(rng);
  if (u < 0.70) return FirmStatus::active;
  if (u < 0.82) return FirmStatus::acquired;
  if (u < 0.88) return FirmStatus::ipo;
  return FirmStatus::dead;
}

CivilDate date_at_offset(int birth_year, double offset_years, int last_year) {
  int year = birth_year + static_cast<int>(offset_years);
  double frac = offset_years - static_cast<int>(offset_years);
  if (year > last_year) {
    year = last_year;
    frac = 1.0 - 1e-9; // pin to the final day
  }
  int doy = 1 + static_cast<int>(frac * days_in_year(year));
  doy = std::min(doy, days_in_year(year));
  CivilDate d{year, 1, 1};
  while (doy > days_in_month(d.year, d.month)) {
    doy -= days_in_month(d.year, d.month);
    ++d.month;
  }
  d.day = doy;
  return d;
}

} // namespace

void validate_synth_config(const SynthConfig& cfg) {
  auto fail = [](const std::string& what) { throw Error(Errc::bad_config, what); };
  if (cfg.n_investors < 1) fail("n_investors must be positive");
  if (cfg.n_firms < 1) fail("n_firms must be positive");
  if (cfg.last_year < cfg.first_year) fail("year span is reversed");
  if (cfg.n_subsectors < 1) fail("n_subsectors must be positive");
  if (cfg.rounds_mean < 1.0) fail("rounds_mean must be at least 1");
  if (cfg.round_join_prob < 0.0 || cfg.round_join_prob >= 1.0)
    fail("round_join_prob must lie in [0, 1)");
  if (cfg.amount_sigma < 0.0) fail("amount_sigma must be non-negative");
  if (cfg.pa_strength < 0.0) fail("pa_strength must be non-negative");
  if (cfg.high_regime_fraction < 0.0 || cfg.high_regime_fraction > 1.0)
    fail("high_regime_fraction must lie in [0, 1]");
  if (cfg.high_regime_ratio <= 0.0) fail("high_regime_ratio must be positive");
}

SynthResult generate(const SynthConfig& cfg) {
  validate_synth_config(cfg);

  const int firm_width = id_width(cfg.n_firms);
  const int investor_width = id_width(cfg.n_investors);

  SynthResult out;
  for (int v = 0; v < cfg.n_investors; ++v) {
    InvestorRecord rec;
    rec.investor_id = padded_id('I', v, investor_width);
    rec.name = rec.investor_id;
    out.data.investors.emplace(rec.investor_id, rec);
  }
  // Home sub-sectors keep co-investment mostly local, so projection
  // components stay at desk scale even for large firm counts.
  std::vector<int> home(static_cast<size_t>(cfg.n_investors));
  for (int v = 0; v < cfg.n_investors; ++v) home[static_cast<size_t>(v)] = v % cfg.n_subsectors;

  std::mt19937_64 firm_rng(derive_seed(cfg.seed, 1));
  const int span = cfg.last_year - cfg.first_year + 1;
  const uint64_t birth_span = static_cast<uint64_t>(std::max(1, span - 6));
  std::vector<int> firm_subsector(static_cast<size_t>(cfg.n_firms));
  std::vector<int> firm_birth(static_cast<size_t>(cfg.n_firms));
  std::vector<std::string> firm_ids(static_cast<size_t>(cfg.n_firms));
  for (int f = 0; f < cfg.n_firms; ++f) {
    FirmRecord rec;
    rec.firm_id = padded_id('F', f, firm_width);
    rec.name = rec.firm_id;
    firm_ids[static_cast<size_t>(f)] = rec.firm_id;
    firm_subsector[static_cast<size_t>(f)] = static_cast<int>(bounded(firm_rng, static_cast<uint64_t>(cfg.n_subsectors)));
    rec.subsector = subsector_name(firm_subsector[static_cast<size_t>(f)]);
    firm_birth[static_cast<size_t>(f)] = cfg.first_year + static_cast<int>(bounded(firm_rng, birth_span));
    rec.birth_year = firm_birth[static_cast<size_t>(f)];
    rec.status = pick_status(firm_rng);
    rec.country = pick_country(firm_rng);
    rec.continent = continent_for_country(*rec.country);
    out.data.firms.emplace(rec.firm_id, std::move(rec));
  }

  // Deal rows per firm follow 1 + Poisson(rounds_mean - 1); consecutive rows
  // join the open round with round_join_prob, which is what creates co-bid
  // rounds and a non-trivial investor projection.
  std::mt19937_64 round_rng(derive_seed(cfg.seed, 2));
  std::vector<std::vector<double>> round_times(static_cast<size_t>(cfg.n_firms));
  std::vector<std::vector<int>> round_sizes(static_cast<size_t>(cfg.n_firms));
  for (int f = 0; f < cfg.n_firms; ++f) {
    const int events = 1 + static_cast<int>(poisson(round_rng, cfg.rounds_mean - 1.0));
    auto& times = round_times[static_cast<size_t>(f)];
    auto& sizes = round_sizes[static_cast<size_t>(f)];
    double t = std::min(exponential(round_rng, 1.0), 8.0);
    times.push_back(t);
    sizes.push_back(1);
    for (int e = 1; e < events; ++e) {
      if (uniform01(round_rng) < cfg.round_join_prob && sizes.back() < cfg.n_investors) {
        ++sizes.back();
      } else {
        t += 0.3 + exponential(round_rng, 0.45);
        times.push_back(t);
        sizes.push_back(1);
      }
    }
  }

  std::mt19937_64 wire_rng(derive_seed(cfg.seed, 3));
  std::vector<double> deal_count(static_cast<size_t>(cfg.n_investors), 0.0);
  std::vector<std::vector<std::vector<int>>> round_investors(static_cast<size_t>(cfg.n_firms));
  std::vector<double> weight(static_cast<size_t>(cfg.n_investors));
  for (int f = 0; f < cfg.n_firms; ++f) {
    const auto& sizes = round_sizes[static_cast<size_t>(f)];
    round_investors[static_cast<size_t>(f)].resize(sizes.size());
    for (size_t r = 0; r < sizes.size(); ++r) {
      auto& chosen = round_investors[static_cast<size_t>(f)][r];
      const int want = sizes[r];
      std::vector<bool> used(static_cast<size_t>(cfg.n_investors), false);
      for (int pick = 0; pick < want; ++pick) {
        double total = 0.0;
        for (int v = 0; v < cfg.n_investors; ++v) {
          const auto idx = static_cast<size_t>(v);
          if (used[idx]) {
            weight[idx] = 0.0;
            continue;
          }
          const double local = home[idx] == firm_subsector[static_cast<size_t>(f)] ? 1.0 : 0.05;
          weight[idx] = (1.0 + cfg.pa_strength * deal_count[idx]) * local;
          total += weight[idx];
        }
        double u = uniform01(wire_rng) * total;
        int v = 0;
        for (; v < cfg.n_investors - 1; ++v) {
          u -= weight[static_cast<size_t>(v)];
          if (u < 0.0) break;
        }
        while (used[static_cast<size_t>(v)]) --v; // numeric tail guard
        used[static_cast<size_t>(v)] = true;
        deal_count[static_cast<size_t>(v)] += 1.0;
        chosen.push_back(v);
      }
    }
  }

  std::mt19937_64 regime_rng(derive_seed(cfg.seed, 4));
  std::vector<bool> high(static_cast<size_t>(cfg.n_firms), false);
  for (int f = 0; f < cfg.n_firms; ++f)
    high[static_cast<size_t>(f)] = uniform01(regime_rng) < cfg.high_regime_fraction;

  double max_degree = 1.0;
  std::vector<int> degree(static_cast<size_t>(cfg.n_firms), 0);
  for (int f = 0; f < cfg.n_firms; ++f) {
    std::set<int> distinct;
    for (const auto& chosen : round_investors[static_cast<size_t>(f)])
      distinct.insert(chosen.begin(), chosen.end());
    degree[static_cast<size_t>(f)] = static_cast<int>(distinct.size());
    max_degree = std::max(max_degree, static_cast<double>(distinct.size()));
  }

  std::mt19937_64 amount_rng(derive_seed(cfg.seed, 5));
  int deal_serial = 0;
  const int deal_width = 7;
  for (int f = 0; f < cfg.n_firms; ++f) {
    const auto idx = static_cast<size_t>(f);
    const double normalized = static_cast<double>(degree[idx]) / max_degree;
    double total = std::exp(cfg.amount_mu + cfg.amount_sigma * normal01(amount_rng) +
                            cfg.gamma * normalized);
    if (high[idx]) total *= cfg.high_regime_ratio;

    const auto& times = round_times[idx];
    size_t events = 0;
    for (int s : round_sizes[idx]) events += static_cast<size_t>(s);
    std::vector<double> split(events);
    double split_sum = 0.0;
    for (auto& s : split) {
      s = std::exp(0.75 * normal01(amount_rng));
      split_sum += s;
    }

    FirmTruth truth;
    truth.firm_id = firm_ids[idx];
    truth.high_regime = high[idx];
    truth.effect_component = cfg.gamma * normalized;
    out.truth.push_back(std::move(truth));

    size_t event = 0;
    for (size_t r = 0; r < times.size(); ++r) {
      const auto& chosen = round_investors[idx][r];
      const CivilDate date = date_at_offset(firm_birth[idx], times[r], cfg.last_year);
      for (int v : chosen) {
        DealRecord deal;
        deal.deal_id = padded_id('D', deal_serial++, deal_width);
        deal.round_id = round_label(static_cast<int>(r));
        deal.investor_id = padded_id('I', v, investor_width);
        deal.firm_id = firm_ids[idx];
        deal.amount_usd = total * split[event++] / split_sum;
        deal.date = date;
        deal.year = date.year;
        out.data.deals.push_back(std::move(deal));
      }
    }
  }
  return out;
}

void write_ground_truth(std::ostream& out, std::span<const FirmTruth> truth) {
  write_csv_record(out, std::vector<std::string>{"firm_id", "true_regime", "true_effect_component"});
  for (const auto& t : truth)
    write_csv_record(out, std::vector<std::string>{t.firm_id, t.high_regime ? "high" : "low",
                                                   format_double(t.effect_component)});
}

} // namespace vcnet
