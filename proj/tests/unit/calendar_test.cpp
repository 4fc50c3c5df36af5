#include <gtest/gtest.h>

#include "tkgf/calendar.hpp"
#include "tkgf/rng.hpp"

namespace tkgf {
namespace {

TEST(Calendar, DaysRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t days = static_cast<std::int64_t>(rng.below(200000)) - 100000;
    EXPECT_EQ(to_days(from_days(days)), days);
  }
  EXPECT_EQ(to_days({1970, 1, 1}), 0);
  EXPECT_EQ(to_days({2000, 3, 1}) - to_days({2000, 2, 28}), 2);
  EXPECT_EQ(to_days({1900, 3, 1}) - to_days({1900, 2, 28}), 1);
}

TEST(Calendar, ParseIsoIsStrict) {
  EXPECT_EQ(parse_iso("2015-01-25"), (CivilDate{2015, 1, 25}));
  EXPECT_FALSE(parse_iso("2015-02-30"));
  EXPECT_FALSE(parse_iso("2015-1-25"));
  EXPECT_FALSE(parse_iso("2015-01-25x"));
  EXPECT_EQ(format_iso({2015, 7, 1}), "2015-07-01");
}

TEST(Calendar, MonthArithmetic) {
  EXPECT_EQ(add_months_first_day({2015, 12, 17}, 1), (CivilDate{2016, 1, 1}));
  EXPECT_EQ(add_months_first_day({2015, 1, 31}, -1), (CivilDate{2014, 12, 1}));
  EXPECT_EQ(last_day_of_month(2016, 2), (CivilDate{2016, 2, 29}));
}

TEST(TimeAxis, DayStepsRoundTrip) {
  const TimeAxis axis{Granularity::day, CivilDate{2014, 1, 1}};
  for (Step s = 0; s < 800; s += 7) {
    const auto d = axis.start_date(s);
    ASSERT_TRUE(d);
    EXPECT_EQ(axis.step_of(*d), s);
  }
  EXPECT_EQ(axis.render(0), "2014-01-01");
  EXPECT_EQ(axis.render(31), "2014-02-01");
}

TEST(TimeAxis, YearStepsCoverWholeYears) {
  const TimeAxis axis{Granularity::year, CivilDate{2011, 1, 1}};
  EXPECT_EQ(axis.render(2), "2013");
  EXPECT_EQ(axis.start_date(2), (CivilDate{2013, 1, 1}));
  EXPECT_EQ(axis.end_date(2), (CivilDate{2013, 12, 31}));
  EXPECT_EQ(axis.step_of({2013, 6, 5}), 2);
}

TEST(TimeAxis, UnitHasNoCalendar) {
  const TimeAxis axis{Granularity::unit, std::nullopt};
  EXPECT_FALSE(axis.has_calendar());
  EXPECT_EQ(axis.render(42), "42");
  EXPECT_FALSE(axis.start_date(3));
}

}  // namespace
}  // namespace tkgf
