#include "vcnet/ingest.hpp"

#include "vcnet/csv.hpp"
#include "vcnet/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace vcnet {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::malformed_row: return "MalformedRow";
    case Errc::missing_amount: return "MissingAmount";
    case Errc::bad_date: return "BadDate";
    case Errc::bad_field: return "BadField";
    case Errc::duplicate_deal_id: return "DuplicateDealId";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::non_bipartite_id: return "NonBipartiteId";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::component_too_large: return "ComponentTooLarge";
    case Errc::too_few_curves: return "TooFewCurves";
    case Errc::constant_column: return "ConstantColumn";
    case Errc::singular_design: return "SingularDesign";
    case Errc::too_many_features: return "TooManyFeatures";
    case Errc::unknown_community: return "UnknownCommunity";
    case Errc::missing_input: return "MissingInput";
    case Errc::bad_config: return "BadConfig";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

const char* firm_status_name(FirmStatus s) noexcept {
  switch (s) {
    case FirmStatus::active: return "active";
    case FirmStatus::acquired: return "acquired";
    case FirmStatus::ipo: return "ipo";
    case FirmStatus::dead: return "dead";
    case FirmStatus::unknown: return "unknown";
  }
  return "unknown";
}

FirmStatus parse_firm_status(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower.empty() || lower == "unknown") return FirmStatus::unknown;
  if (lower == "active") return FirmStatus::active;
  if (lower == "acquired") return FirmStatus::acquired;
  if (lower == "ipo") return FirmStatus::ipo;
  if (lower == "dead") return FirmStatus::dead;
  throw Error(Errc::bad_field, "unknown firm status '" + std::string(s) + "'");
}

namespace {

// Header lookup: maps configured column names to field positions.
class HeaderIndex {
public:
  HeaderIndex(const std::vector<std::string>& header, const std::string& source)
      : source_(source) {
    for (size_t i = 0; i < header.size(); ++i) by_name_[header[i]] = i;
    width_ = header.size();
  }

  size_t require(const std::string& column) const {
    auto it = by_name_.find(column);
    if (it == by_name_.end())
      throw Error(Errc::malformed_row, source_ + ": missing column '" + column + "'");
    return it->second;
  }

  size_t width() const noexcept { return width_; }

private:
  std::unordered_map<std::string, size_t> by_name_;
  std::string source_;
  size_t width_;
};

bool blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

double parse_amount(const std::string& s, size_t record) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(Errc::bad_field, "row " + std::to_string(record) + ": bad amount '" + s + "'");
  if (v < 0.0)
    throw Error(Errc::bad_field, "row " + std::to_string(record) + ": negative amount");
  return v;
}

std::optional<int> parse_optional_int(const std::string& s, size_t record, const char* what) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(Errc::bad_field,
                "row " + std::to_string(record) + ": bad " + what + " '" + s + "'");
  return v;
}

std::optional<std::string> nonempty(std::string s) {
  if (s.empty()) return std::nullopt;
  return std::optional<std::string>(std::move(s));
}

} // namespace

std::vector<DealRecord> parse_deals(std::istream& in, const DealSchema& schema,
                                    MissingAmountPolicy policy) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_record(fields))
    throw Error(Errc::malformed_row, "deals: empty input, expected header row");
  HeaderIndex header(fields, "deals");
  const size_t c_deal = header.require(schema.deal_id);
  const size_t c_round = header.require(schema.round_id);
  const size_t c_inv = header.require(schema.investor_id);
  const size_t c_firm = header.require(schema.firm_id);
  const size_t c_amount = header.require(schema.amount_usd);
  const size_t c_date = header.require(schema.date);

  std::vector<DealRecord> deals;
  std::unordered_set<std::string> seen_ids;
  while (reader.next_record(fields)) {
    if (blank_record(fields)) continue;
    const size_t rec = reader.record_number();
    if (fields.size() != header.width())
      throw Error(Errc::malformed_row, "deals row " + std::to_string(rec) + ": expected " +
                                           std::to_string(header.width()) + " fields, got " +
                                           std::to_string(fields.size()));
    DealRecord d;
    d.deal_id = fields[c_deal];
    d.round_id = fields[c_round];
    d.investor_id = fields[c_inv];
    d.firm_id = fields[c_firm];
    if (d.deal_id.empty())
      throw Error(Errc::bad_field, "deals row " + std::to_string(rec) + ": empty deal_id");
    if (!seen_ids.insert(d.deal_id).second)
      throw Error(Errc::duplicate_deal_id,
                  "deals row " + std::to_string(rec) + ": deal_id '" + d.deal_id + "'");
    const std::string& amount = fields[c_amount];
    if (amount.empty()) {
      if (policy == MissingAmountPolicy::error)
        throw Error(Errc::missing_amount, "deals row " + std::to_string(rec) + ": empty amount");
      d.missing_amount = true;
    } else {
      d.amount_usd = parse_amount(amount, rec);
      d.zero_amount = d.amount_usd == 0.0;
    }
    try {
      d.date = parse_iso_date(fields[c_date]);
    } catch (const Error& e) {
      throw Error(Errc::bad_date, "deals row " + std::to_string(rec) + ": " + e.what());
    }
    d.year = d.date.year;
    deals.push_back(std::move(d));
  }
  return deals;
}

std::vector<FirmRecord> parse_firms(std::istream& in, const FirmSchema& schema) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_record(fields))
    throw Error(Errc::malformed_row, "firms: empty input, expected header row");
  HeaderIndex header(fields, "firms");
  const size_t c_id = header.require(schema.firm_id);
  const size_t c_name = header.require(schema.name);
  const size_t c_birth = header.require(schema.birth_year);
  const size_t c_sub = header.require(schema.subsector);
  const size_t c_status = header.require(schema.status);
  const size_t c_country = header.require(schema.country);
  const size_t c_continent = header.require(schema.continent);

  std::vector<FirmRecord> firms;
  std::unordered_set<std::string> seen_ids;
  while (reader.next_record(fields)) {
    if (blank_record(fields)) continue;
    const size_t rec = reader.record_number();
    if (fields.size() != header.width())
      throw Error(Errc::malformed_row, "firms row " + std::to_string(rec) + ": expected " +
                                           std::to_string(header.width()) + " fields, got " +
                                           std::to_string(fields.size()));
    FirmRecord f;
    f.firm_id = fields[c_id];
    if (f.firm_id.empty())
      throw Error(Errc::bad_field, "firms row " + std::to_string(rec) + ": empty firm_id");
    if (!seen_ids.insert(f.firm_id).second)
      throw Error(Errc::duplicate_id,
                  "firms row " + std::to_string(rec) + ": firm_id '" + f.firm_id + "'");
    f.name = fields[c_name];
    f.birth_year = parse_optional_int(fields[c_birth], rec, "birth_year");
    f.subsector = nonempty(fields[c_sub]);
    f.status = parse_firm_status(fields[c_status]);
    f.country = nonempty(fields[c_country]);
    f.continent = nonempty(fields[c_continent]);
    firms.push_back(std::move(f));
  }
  return firms;
}

std::vector<InvestorRecord> parse_investors(std::istream& in, const InvestorSchema& schema) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next_record(fields))
    throw Error(Errc::malformed_row, "investors: empty input, expected header row");
  HeaderIndex header(fields, "investors");
  const size_t c_id = header.require(schema.investor_id);
  const size_t c_name = header.require(schema.name);

  std::vector<InvestorRecord> investors;
  std::unordered_set<std::string> seen_ids;
  while (reader.next_record(fields)) {
    if (blank_record(fields)) continue;
    const size_t rec = reader.record_number();
    if (fields.size() != header.width())
      throw Error(Errc::malformed_row, "investors row " + std::to_string(rec) + ": expected " +
                                           std::to_string(header.width()) + " fields, got " +
                                           std::to_string(fields.size()));
    InvestorRecord r;
    r.investor_id = fields[c_id];
    if (r.investor_id.empty())
      throw Error(Errc::bad_field, "investors row " + std::to_string(rec) + ": empty investor_id");
    if (!seen_ids.insert(r.investor_id).second)
      throw Error(Errc::duplicate_id,
                  "investors row " + std::to_string(rec) + ": investor_id '" + r.investor_id + "'");
    r.name = fields[c_name];
    investors.push_back(std::move(r));
  }
  return investors;
}

void write_deals(std::ostream& out, std::span<const DealRecord> deals) {
  write_csv_record(out, std::vector<std::string>{"deal_id", "round_id", "investor_id", "firm_id",
                                                 "amount_usd", "date"});
  for (const auto& d : deals) {
    write_csv_record(out, std::vector<std::string>{
                              d.deal_id, d.round_id, d.investor_id, d.firm_id,
                              d.missing_amount ? std::string() : format_double(d.amount_usd),
                              format_iso_date(d.date)});
  }
}

void write_firms(std::ostream& out, std::span<const FirmRecord> firms) {
  write_csv_record(out, std::vector<std::string>{"firm_id", "name", "birth_year", "subsector",
                                                 "status", "country", "continent"});
  for (const auto& f : firms) {
    write_csv_record(out, std::vector<std::string>{
                              f.firm_id, f.name,
                              f.birth_year ? std::to_string(*f.birth_year) : std::string(),
                              f.subsector.value_or(""), firm_status_name(f.status),
                              f.country.value_or(""), f.continent.value_or("")});
  }
}

void write_investors(std::ostream& out, std::span<const InvestorRecord> investors) {
  write_csv_record(out, std::vector<std::string>{"investor_id", "name"});
  for (const auto& r : investors)
    write_csv_record(out, std::vector<std::string>{r.investor_id, r.name});
}

Dataset load_dataset(const std::string& deals_path, const std::string& firms_path,
                     const std::string& investors_path, const IngestOptions& opts) {
  auto open = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::missing_input, "cannot open '" + path + "'");
    return in;
  };
  Dataset d;
  {
    auto in = open(deals_path);
    d.deals = parse_deals(in, opts.deals, opts.missing_amounts);
  }
  {
    auto in = open(firms_path);
    for (auto& f : parse_firms(in, opts.firms)) {
      if (opts.derive_continents && !f.continent && f.country)
        f.continent = continent_for_country(*f.country);
      d.firms.emplace(f.firm_id, std::move(f));
    }
  }
  {
    auto in = open(investors_path);
    for (auto& r : parse_investors(in, opts.investors)) d.investors.emplace(r.investor_id, std::move(r));
  }
  return d;
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  std::unordered_set<std::string> deal_ids;
  for (const auto& deal : d.deals) {
    if (!deal_ids.insert(deal.deal_id).second)
      out.push_back({"DuplicateDealId", deal.deal_id, "deal_id appears more than once"});
    if (!d.firms.contains(deal.firm_id))
      out.push_back({"DanglingReference", deal.deal_id, "unknown firm_id '" + deal.firm_id + "'"});
    if (!d.investors.contains(deal.investor_id))
      out.push_back(
          {"DanglingReference", deal.deal_id, "unknown investor_id '" + deal.investor_id + "'"});
    if (!deal.missing_amount && deal.amount_usd < 0.0)
      out.push_back({"NegativeAmount", deal.deal_id, "amount_usd < 0"});
    if (deal.year != deal.date.year)
      out.push_back({"YearMismatch", deal.deal_id, "year field disagrees with date"});
    auto firm = d.firms.find(deal.firm_id);
    if (firm != d.firms.end() && firm->second.birth_year &&
        deal.year < *firm->second.birth_year)
      out.push_back({"BirthAfterDeal", deal.firm_id,
                     "deal '" + deal.deal_id + "' dated " + std::to_string(deal.year) +
                         ", firm born " + std::to_string(*firm->second.birth_year)});
  }
  return out;
}

std::set<std::string> filter_analysis_cohort(const Dataset& d, int horizon_years) {
  if (horizon_years < 1) throw Error(Errc::bad_config, "horizon_years must be >= 1");
  // First pass over deals groups by firm so the predicate is order-independent.
  std::map<std::string, std::pair<bool, bool>> by_firm; // firm -> (has in-horizon deal, has in-horizon unknown amount)
  for (const auto& deal : d.deals) {
    auto firm = d.firms.find(deal.firm_id);
    if (firm == d.firms.end() || !firm->second.birth_year) continue;
    const double offset = years_since_birth(deal.date, *firm->second.birth_year);
    if (offset < 0.0 || offset >= static_cast<double>(horizon_years)) continue;
    auto& entry = by_firm[deal.firm_id];
    entry.first = true;
    if (deal.missing_amount) entry.second = true;
  }
  std::set<std::string> cohort;
  for (const auto& [firm_id, flags] : by_firm) {
    const auto& firm = d.firms.at(firm_id);
    if (!firm.subsector) continue;
    if (flags.first && !flags.second) cohort.insert(firm_id);
  }
  return cohort;
}

std::optional<std::string> continent_for_country(std::string_view country) {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"argentina", "South America"}, {"australia", "Oceania"},     {"austria", "Europe"},
      {"belgium", "Europe"},          {"brazil", "South America"},  {"canada", "North America"},
      {"chile", "South America"},     {"china", "Asia"},            {"colombia", "South America"},
      {"czech republic", "Europe"},   {"denmark", "Europe"},        {"egypt", "Africa"},
      {"estonia", "Europe"},          {"finland", "Europe"},        {"france", "Europe"},
      {"germany", "Europe"},          {"greece", "Europe"},         {"hong kong", "Asia"},
      {"hungary", "Europe"},          {"india", "Asia"},            {"indonesia", "Asia"},
      {"ireland", "Europe"},          {"israel", "Asia"},           {"italy", "Europe"},
      {"japan", "Asia"},              {"kenya", "Africa"},          {"luxembourg", "Europe"},
      {"malaysia", "Asia"},           {"mexico", "North America"},  {"netherlands", "Europe"},
      {"new zealand", "Oceania"},     {"nigeria", "Africa"},        {"norway", "Europe"},
      {"poland", "Europe"},           {"portugal", "Europe"},       {"russia", "Europe"},
      {"saudi arabia", "Asia"},       {"singapore", "Asia"},        {"south africa", "Africa"},
      {"south korea", "Asia"},        {"spain", "Europe"},          {"sweden", "Europe"},
      {"switzerland", "Europe"},      {"taiwan", "Asia"},           {"thailand", "Asia"},
      {"turkey", "Asia"},             {"uae", "Asia"},              {"uk", "Europe"},
      {"ukraine", "Europe"},          {"united arab emirates", "Asia"},
      {"united kingdom", "Europe"},   {"united states", "North America"},
      {"usa", "North America"},       {"vietnam", "Asia"},
  };
  std::string lower(country);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  auto it = table.find(lower);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

} // namespace vcnet
