#pragma once

#include "vcnet/records.hpp"

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace vcnet {

/// Column-name mapping for deals.csv. Defaults match the file contract;
/// override to ingest files with differently named columns.
struct DealSchema {
  std::string deal_id = "deal_id";
  std::string round_id = "round_id";
  std::string investor_id = "investor_id";
  std::string firm_id = "firm_id";
  std::string amount_usd = "amount_usd";
  std::string date = "date";
};

struct FirmSchema {
  std::string firm_id = "firm_id";
  std::string name = "name";
  std::string birth_year = "birth_year";
  std::string subsector = "subsector";
  std::string status = "status";
  std::string country = "country";
  std::string continent = "continent";
};

struct InvestorSchema {
  std::string investor_id = "investor_id";
  std::string name = "name";
};

enum class MissingAmountPolicy {
  error, // empty amount raises Errc::missing_amount (default)
  flag,  // record kept with missing_amount set; excluded from the cohort
};

std::vector<DealRecord> parse_deals(std::istream& in, const DealSchema& schema = {},
                                    MissingAmountPolicy policy = MissingAmountPolicy::error);
std::vector<FirmRecord> parse_firms(std::istream& in, const FirmSchema& schema = {});
std::vector<InvestorRecord> parse_investors(std::istream& in, const InvestorSchema& schema = {});

void write_deals(std::ostream& out, std::span<const DealRecord> deals);
void write_firms(std::ostream& out, std::span<const FirmRecord> firms);
void write_investors(std::ostream& out, std::span<const InvestorRecord> investors);

struct IngestOptions {
  DealSchema deals;
  FirmSchema firms;
  InvestorSchema investors;
  MissingAmountPolicy missing_amounts = MissingAmountPolicy::error;
  bool derive_continents = true; // fill missing continent from country
};

/// Reads the three CSV files and assembles a Dataset. Throws
/// Errc::missing_input when a file cannot be opened.
Dataset load_dataset(const std::string& deals_path, const std::string& firms_path,
                     const std::string& investors_path, const IngestOptions& opts = {});

/// One invariant breach; violations are data, not failures.
struct Violation {
  std::string rule;      // e.g. "DanglingReference"
  std::string entity_id; // deal/firm/investor id
  std::string detail;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_dataset(const Dataset& d);

/// Firms with known birth year, known sub-sector, at least one deal within
/// [0, horizon) years of birth, and no in-horizon deal of unknown amount.
std::set<std::string> filter_analysis_cohort(const Dataset& d, int horizon_years = 10);

/// Built-in country -> continent lookup; empty when unresolvable.
std::optional<std::string> continent_for_country(std::string_view country);

} // namespace vcnet
