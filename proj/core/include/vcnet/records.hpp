#pragma once

#include "vcnet/dates.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vcnet {

enum class FirmStatus { active, acquired, ipo, dead, unknown };

const char* firm_status_name(FirmStatus s) noexcept;
FirmStatus parse_firm_status(std::string_view s); // throws Errc::bad_field

/// One transaction from an investor to a firm.
struct DealRecord {
  std::string deal_id;
  std::string round_id;
  std::string investor_id;
  std::string firm_id;
  double amount_usd = 0.0;
  CivilDate date;
  int year = 0; // calendar year of `date`

  bool zero_amount = false;    // kept, but flagged
  bool missing_amount = false; // only under MissingAmountPolicy::flag
};

struct FirmRecord {
  std::string firm_id;
  std::string name;
  std::optional<int> birth_year;
  std::optional<std::string> subsector;
  FirmStatus status = FirmStatus::unknown;
  std::optional<std::string> country;
  std::optional<std::string> continent;
};

struct InvestorRecord {
  std::string investor_id;
  std::string name;
};

/// Immutable after ingest; safe to share across threads.
struct Dataset {
  std::vector<DealRecord> deals;
  std::map<std::string, FirmRecord> firms;
  std::map<std::string, InvestorRecord> investors;
};

} // namespace vcnet
