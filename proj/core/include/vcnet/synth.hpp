#pragma once

#include "vcnet/records.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vcnet {

/// Knobs for the deterministic market generator.
struct SynthConfig {
  uint64_t seed = 42;
  int n_investors = 250;
  int n_firms = 2000;
  int first_year = 2000;
  int last_year = 2015;
  int n_subsectors = 8;
  double rounds_mean = 3.0;          // expected deal rows per firm, >= 1
  double round_join_prob = 0.45;     // chance a deal joins the open round instead of a new one
  double amount_mu = 15.0;           // log of firm total, USD
  double amount_sigma = 0.75;
  double pa_strength = 1.0;          // 0 = uniform investor choice
  double gamma = 0.0;                // funding boost per unit of normalized degree
  double high_regime_fraction = 0.0; // in [0, 1]
  double high_regime_ratio = 10.0;   // total-funding multiplier for high-regime firms
};

void validate_synth_config(const SynthConfig& cfg); // throws Errc::bad_config

struct FirmTruth {
  std::string firm_id;
  bool high_regime = false;
  double effect_component = 0.0; // gamma * degree / max degree, log scale
};

struct SynthResult {
  Dataset data;
  std::vector<FirmTruth> truth; // one row per firm, ascending firm_id
};

/// Deterministic for a fixed config; the result always validates cleanly.
SynthResult generate(const SynthConfig& cfg);

void write_ground_truth(std::ostream& out, std::span<const FirmTruth> truth);

} // namespace vcnet
