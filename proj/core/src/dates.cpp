#include "vcnet/dates.hpp"

#include "vcnet/error.hpp"

#include <array>
#include <charconv>

namespace vcnet {

bool is_leap_year(int year) noexcept {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) noexcept {
  static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return lengths[static_cast<size_t>(month - 1)];
}

int days_in_year(int year) noexcept { return is_leap_year(year) ? 366 : 365; }

int day_of_year(const CivilDate& d) noexcept {
  int doy = d.day;
  for (int m = 1; m < d.month; ++m) doy += days_in_month(d.year, m);
  return doy;
}

long days_from_civil(const CivilDate& d) noexcept {
  // Howard Hinnant's days-from-civil algorithm.
  long y = d.year;
  const long m = d.month;
  const long dd = d.day;
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned long yoe = static_cast<unsigned long>(y - era * 400);
  const unsigned long doyy =
      static_cast<unsigned long>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1);
  const unsigned long doe = yoe * 365 + yoe / 4 - yoe / 100 + doyy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

CivilDate parse_iso_date(std::string_view s) {
  auto fail = [&] { throw Error(Errc::bad_date, "expected YYYY-MM-DD, got '" + std::string(s) + "'"); };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
  auto parse_int = [&](std::string_view part) {
    int v = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || p != part.data() + part.size()) fail();
    return v;
  };
  CivilDate d;
  d.year = parse_int(s.substr(0, 4));
  d.month = parse_int(s.substr(5, 2));
  d.day = parse_int(s.substr(8, 2));
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month)) fail();
  return d;
}

std::string format_iso_date(const CivilDate& d) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
  return std::string(buf);
}

double years_since_birth(const CivilDate& d, int birth_year) noexcept {
  return static_cast<double>(d.year - birth_year) +
         static_cast<double>(day_of_year(d) - 1) / static_cast<double>(days_in_year(d.year));
}

} // namespace vcnet
