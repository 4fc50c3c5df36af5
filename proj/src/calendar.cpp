#include "tkgf/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace tkgf {

namespace chr = std::chrono;

bool is_valid(const CivilDate& d) {
  return chr::year_month_day{chr::year{d.year}, chr::month{d.month}, chr::day{d.day}}.ok();
}

unsigned days_in_month(int year, unsigned month) {
  const chr::year_month_day_last ymdl{chr::year{year}, chr::month_day_last{chr::month{month}}};
  return static_cast<unsigned>(ymdl.day());
}

std::int64_t to_days(const CivilDate& d) {
  const chr::sys_days sd{chr::year{d.year} / chr::month{d.month} / chr::day{d.day}};
  return sd.time_since_epoch().count();
}

CivilDate from_days(std::int64_t days) {
  const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

CivilDate add_days(const CivilDate& d, std::int64_t n) { return from_days(to_days(d) + n); }

CivilDate add_months_first_day(const CivilDate& d, int n) {
  const chr::year_month ym = chr::year{d.year} / chr::month{d.month} + chr::months{n};
  return {static_cast<int>(ym.year()), static_cast<unsigned>(ym.month()), 1};
}

CivilDate last_day_of_month(int year, unsigned month) {
  return {year, month, days_in_month(year, month)};
}

std::string format_iso(const CivilDate& d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

namespace {

bool parse_digits(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{};
}

}  // namespace

std::optional<CivilDate> parse_iso(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(s.substr(0, 4), y) || !parse_digits(s.substr(5, 2), m) ||
      !parse_digits(s.substr(8, 2), d))
    return std::nullopt;
  CivilDate date{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
  if (!is_valid(date)) return std::nullopt;
  return date;
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::day: return "day";
    case Granularity::year: return "year";
    case Granularity::unit: return "unit";
  }
  return "unit";
}

Granularity parse_granularity(std::string_view s) {
  if (s == "day") return Granularity::day;
  if (s == "year") return Granularity::year;
  if (s == "unit") return Granularity::unit;
  throw std::invalid_argument("unknown granularity '" + std::string(s) + "'");
}

std::string TimeAxis::render(Step step) const {
  if (!has_calendar()) return std::to_string(step);
  if (granularity == Granularity::year) return std::to_string(origin->year + step);
  return format_iso(add_days(*origin, step));
}

std::optional<CivilDate> TimeAxis::start_date(Step step) const {
  if (!has_calendar()) return std::nullopt;
  if (granularity == Granularity::year)
    return CivilDate{origin->year + static_cast<int>(step), 1, 1};
  return add_days(*origin, step);
}

std::optional<CivilDate> TimeAxis::end_date(Step step) const {
  if (!has_calendar()) return std::nullopt;
  if (granularity == Granularity::year)
    return CivilDate{origin->year + static_cast<int>(step), 12, 31};
  return add_days(*origin, step);
}

Step TimeAxis::step_of(const CivilDate& d) const {
  if (!has_calendar()) throw std::logic_error("time axis has no calendar");
  if (granularity == Granularity::year) return d.year - origin->year;
  return to_days(d) - to_days(*origin);
}

}  // namespace tkgf
