#include "vcnet/ingest.hpp"

#include "vcnet/error.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <sstream>
#include <string>

using namespace vcnet;

namespace {

const char* kDealsHeader = "deal_id,round_id,investor_id,firm_id,amount_usd,date\n";

std::vector<DealRecord> deals_from(const std::string& body,
                                   MissingAmountPolicy policy = MissingAmountPolicy::error) {
  std::istringstream in(std::string(kDealsHeader) + body);
  return parse_deals(in, {}, policy);
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a vcnet::Error");
  return Errc::internal;
}

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("deal row maps fields directly") {
  const auto deals = deals_from("d1,r1,i1,f1,5000000,2005-03-01\n");
  REQUIRE(deals.size() == 1);
  const DealRecord& d = deals[0];
  CHECK(d.deal_id == "d1");
  CHECK(d.round_id == "r1");
  CHECK(d.investor_id == "i1");
  CHECK(d.firm_id == "f1");
  CHECK(d.amount_usd == 5000000.0);
  CHECK(d.date == CivilDate{2005, 3, 1});
  CHECK(d.year == 2005);
  CHECK_FALSE(d.zero_amount);
  CHECK_FALSE(d.missing_amount);
}

TEST_CASE("empty amount raises an error naming the row") {
  const std::string body = "d1,r1,i1,f1,5000000,2005-03-01\nd2,r2,i2,f2,,2006-01-10\n";
  CHECK(code_of([&] { deals_from(body); }) == Errc::missing_amount);
  try {
    deals_from(body);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos); // header is record 1
  }
}

TEST_CASE("flag policy keeps the record with missing_amount set") {
  const auto deals =
      deals_from("d2,r2,i2,f2,,2006-01-10\n", MissingAmountPolicy::flag);
  REQUIRE(deals.size() == 1);
  CHECK(deals[0].missing_amount);
  CHECK(deals[0].amount_usd == 0.0);
}

TEST_CASE("zero amount is kept but flagged") {
  const auto deals = deals_from("d1,r1,i1,f1,0,2005-03-01\n");
  REQUIRE(deals.size() == 1);
  CHECK(deals[0].zero_amount);
}

TEST_CASE("duplicate deal ids are rejected") {
  const std::string body = "d1,r1,i1,f1,100,2005-03-01\nd1,r2,i2,f2,200,2006-03-01\n";
  CHECK(code_of([&] { deals_from(body); }) == Errc::duplicate_deal_id);
}

TEST_CASE("short row and bad numbers are malformed") {
  CHECK(code_of([&] { deals_from("d1,r1,i1,f1,100\n"); }) == Errc::malformed_row);
  CHECK(code_of([&] { deals_from("d1,r1,i1,f1,abc,2005-03-01\n"); }) == Errc::bad_field);
  CHECK(code_of([&] { deals_from("d1,r1,i1,f1,100,2005-3-1\n"); }) == Errc::bad_date);
}

TEST_CASE("schema override renames columns") {
  std::istringstream in("id,round,backer,company,usd,when\nd1,r1,i1,f1,10,2001-05-05\n");
  DealSchema schema;
  schema.deal_id = "id";
  schema.round_id = "round";
  schema.investor_id = "backer";
  schema.firm_id = "company";
  schema.amount_usd = "usd";
  schema.date = "when";
  const auto deals = parse_deals(in, schema);
  REQUIRE(deals.size() == 1);
  CHECK(deals[0].deal_id == "d1");
  CHECK(deals[0].amount_usd == 10.0);
}

TEST_CASE("firm rows keep optional fields optional") {
  std::istringstream in(
      "firm_id,name,birth_year,subsector,status,country,continent\n"
      "f1,Acme,2004,biotech,active,United States,\n"
      "f2,Beta,,,unknown,,\n");
  const auto firms = parse_firms(in);
  REQUIRE(firms.size() == 2);
  CHECK(firms[0].birth_year == 2004);
  CHECK(firms[0].subsector == "biotech");
  CHECK(firms[0].status == FirmStatus::active);
  CHECK(firms[0].country == "United States");
  CHECK_FALSE(firms[0].continent.has_value());
  CHECK_FALSE(firms[1].birth_year.has_value());
  CHECK_FALSE(firms[1].subsector.has_value());
  CHECK(firms[1].status == FirmStatus::unknown);
}

TEST_CASE("writers round-trip all three tables") {
  const auto d = testutil::make_dataset({{"i1", "f1", "r1", 2005, 5e6},
                                         {"i2", "f1", "r1", 2005, 2e6},
                                         {"i1", "f2", "r2", 2007, 1e6}});
  std::ostringstream deals_out, firms_out, investors_out;
  write_deals(deals_out, d.deals);
  std::vector<FirmRecord> firms;
  for (const auto& [id, rec] : d.firms) firms.push_back(rec);
  write_firms(firms_out, firms);
  std::vector<InvestorRecord> investors;
  for (const auto& [id, rec] : d.investors) investors.push_back(rec);
  write_investors(investors_out, investors);

  std::istringstream deals_in(deals_out.str()), firms_in(firms_out.str()),
      investors_in(investors_out.str());
  const auto deals_back = parse_deals(deals_in);
  const auto firms_back = parse_firms(firms_in);
  const auto investors_back = parse_investors(investors_in);
  REQUIRE(deals_back.size() == d.deals.size());
  CHECK(deals_back[0].deal_id == d.deals[0].deal_id);
  CHECK(deals_back[0].amount_usd == d.deals[0].amount_usd);
  CHECK(deals_back[0].date == d.deals[0].date);
  REQUIRE(firms_back.size() == 2);
  CHECK(firms_back[0].firm_id == "f1");
  CHECK(firms_back[0].birth_year == 2005);
  REQUIRE(investors_back.size() == 2);
  CHECK(investors_back[0].investor_id == "i1");
}

TEST_CASE("validate flags dangling references") {
  auto d = testutil::make_dataset({{"i1", "f1", "r1", 2005}});
  d.deals.push_back(d.deals[0]);
  d.deals[1].deal_id = "dx";
  d.deals[1].firm_id = "ghost";
  const auto violations = validate_dataset(d);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "DanglingReference");
  CHECK(violations[0].entity_id == "dx");
}

TEST_CASE("validate flags deals before the firm's birth year") {
  const auto d = testutil::make_dataset({{"i1", "f1", "r1", 2008}}, {{"f1", 2010}});
  const auto violations = validate_dataset(d);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule == "BirthAfterDeal");
  CHECK(violations[0].entity_id == "f1");
}

TEST_CASE("consistent dataset yields an empty report") {
  const auto d = testutil::make_dataset(
      {{"i1", "f1", "r1", 2005}, {"i2", "f1", "r1", 2005}, {"i1", "f2", "r2", 2007}});
  CHECK(validate_dataset(d).empty());
}

TEST_CASE("cohort needs a birth year") {
  auto d = testutil::make_dataset({{"i1", "f1", "r1", 2005}});
  d.firms.at("f1").birth_year.reset();
  CHECK(filter_analysis_cohort(d).empty());
}

TEST_CASE("cohort needs a sub-sector") {
  auto d = testutil::make_dataset({{"i1", "f1", "r1", 2005}});
  d.firms.at("f1").subsector.reset();
  CHECK(filter_analysis_cohort(d).empty());
}

TEST_CASE("late deals do not disqualify a firm with an in-horizon deal") {
  // Born 2005 with deals in 2006 and 2012: both inside the 10-year horizon.
  const auto d = testutil::make_dataset(
      {{"i1", "f1", "r1", 2006}, {"i1", "f1", "r2", 2012}}, {{"f1", 2005}});
  const auto cohort = filter_analysis_cohort(d);
  CHECK(cohort == std::set<std::string>{"f1"});
}

TEST_CASE("firms with only out-of-horizon deals are excluded") {
  const auto d = testutil::make_dataset({{"i1", "f1", "r1", 2016}}, {{"f1", 2005}});
  CHECK(filter_analysis_cohort(d).empty());
  CHECK(filter_analysis_cohort(d, 12) == std::set<std::string>{"f1"});
}

TEST_CASE("in-horizon missing amounts disqualify the firm") {
  auto d = testutil::make_dataset({{"i1", "f1", "r1", 2006}}, {{"f1", 2005}});
  d.deals[0].missing_amount = true;
  CHECK(filter_analysis_cohort(d).empty());
}

TEST_CASE("continent lookup") {
  CHECK(continent_for_country("United States") == "North America");
  CHECK(continent_for_country("Germany") == "Europe");
  CHECK(continent_for_country("Japan") == "Asia");
  CHECK_FALSE(continent_for_country("Atlantis").has_value());
}

TEST_CASE("load_dataset reports the missing path") {
  try {
    load_dataset("/nonexistent/deals.csv", "/nonexistent/firms.csv", "/nonexistent/investors.csv");
    FAIL("expected missing_input");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_input);
    CHECK(std::string(e.what()).find("/nonexistent/deals.csv") != std::string::npos);
  }
}

} // TEST_SUITE
