#pragma once

#include <string>
#include <string_view>

namespace vcnet {

/// Proleptic Gregorian calendar date.
struct CivilDate {
  int year = 1970;
  int month = 1; // 1..12
  int day = 1;   // 1..31

  auto operator<=>(const CivilDate&) const = default;
};

bool is_leap_year(int year) noexcept;
int days_in_month(int year, int month) noexcept;
int days_in_year(int year) noexcept;
int day_of_year(const CivilDate& d) noexcept; // 1-based

/// Days since 1970-01-01 (may be negative).
long days_from_civil(const CivilDate& d) noexcept;

/// Parses strict ISO-8601 "YYYY-MM-DD". Throws Errc::bad_date.
CivilDate parse_iso_date(std::string_view s);
std::string format_iso_date(const CivilDate& d);

/// Calendar-aligned fractional years between Jan 1 of `birth_year` and `d`:
/// whole calendar years plus the elapsed fraction of d's own year. Monotone
/// in d, lands on integers exactly at Jan 1 boundaries.
double years_since_birth(const CivilDate& d, int birth_year) noexcept;

} // namespace vcnet
