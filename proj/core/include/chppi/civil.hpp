#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "chppi/error.hpp"

namespace chppi {

// Proleptic Gregorian day arithmetic (Howard Hinnant's algorithms); day 0 is
// 1970-01-01, a Thursday.

constexpr std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

// 0 = Monday .. 6 = Sunday
constexpr int weekday_from_days(std::int64_t days) {
  return static_cast<int>(((days % 7) + 10) % 7);
}

struct LocalDateTime {
  std::int64_t days = 0;     // since 1970-01-01
  int seconds_of_day = 0;
};

// "YYYY-MM-DDThh:mm:ss" (a space also accepted as the separator)
inline LocalDateTime parse_iso_datetime(const std::string& s) {
  int y, mo, d, h, mi, se;
  if (s.size() < 19 || std::sscanf(s.c_str(), "%4d-%2d-%2d", &y, &mo, &d) != 3 ||
      (s[10] != 'T' && s[10] != ' ') ||
      std::sscanf(s.c_str() + 11, "%2d:%2d:%2d", &h, &mi, &se) != 3)
    raise(Errc::parse, "bad timestamp: '" + s + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 59 || h < 0 ||
      mi < 0 || se < 0)
    raise(Errc::parse, "timestamp out of range: '" + s + "'");
  return LocalDateTime{days_from_civil(y, mo, d), (h * 60 + mi) * 60 + se};
}

inline std::string format_iso_datetime(const LocalDateTime& t) {
  CivilDate c = civil_from_days(t.days);
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", c.year, c.month, c.day,
                t.seconds_of_day / 3600, (t.seconds_of_day / 60) % 60, t.seconds_of_day % 60);
  return buf;
}

}  // namespace chppi
