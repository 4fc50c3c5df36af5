#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tkgf {

using Step = std::int64_t;

struct CivilDate {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  auto operator<=>(const CivilDate&) const = default;
};

bool is_valid(const CivilDate& d);
unsigned days_in_month(int year, unsigned month);
std::int64_t to_days(const CivilDate& d);  // days since 1970-01-01
CivilDate from_days(std::int64_t days);
CivilDate add_days(const CivilDate& d, std::int64_t n);
// First day of the month `n` months away from d's month.
CivilDate add_months_first_day(const CivilDate& d, int n);
CivilDate last_day_of_month(int year, unsigned month);

std::string format_iso(const CivilDate& d);
// Strict YYYY-MM-DD; returns nullopt on malformed or impossible dates.
std::optional<CivilDate> parse_iso(std::string_view s);

enum class Granularity { day, year, unit };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view s);

// Maps dense integer steps to calendar dates. Unit granularity carries no
// calendar; day and year granularities anchor step 0 at `origin`.
struct TimeAxis {
  Granularity granularity = Granularity::unit;
  std::optional<CivilDate> origin;

  bool has_calendar() const { return granularity != Granularity::unit && origin.has_value(); }

  // Date string for day/year axes, bare step otherwise.
  std::string render(Step step) const;
  // First / last calendar day covered by a step. nullopt without a calendar.
  std::optional<CivilDate> start_date(Step step) const;
  std::optional<CivilDate> end_date(Step step) const;
  // Step containing the given date. Requires a calendar.
  Step step_of(const CivilDate& d) const;

  bool operator==(const TimeAxis&) const = default;
};

struct Timestamp {
  Step step = 0;
  TimeAxis axis;

  bool operator==(const Timestamp&) const = default;
};

}  // namespace tkgf
