// Copyright 2026 the esg authors
// SPDX-License-Identifier: Apache-2.0

#include "esg/time.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>

namespace esg {

namespace {

// Days since civil epoch 1970-01-01 (Howard Hinnant's algorithm).
long long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long yr = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

TimePoint now_utc() {
  return std::chrono::time_point_cast<Duration>(std::chrono::system_clock::now());
}

std::string format_rfc3339(TimePoint tp) {
  const long long total_ms = tp.time_since_epoch().count();
  long long secs = total_ms / 1000;
  long long ms = total_ms % 1000;
  if (ms < 0) {
    ms += 1000;
    secs -= 1;
  }
  const long long days = (secs >= 0 ? secs : secs - 86399) / 86400;
  const long long sod = secs - days * 86400;
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", y, m, d,
                sod / 3600, (sod / 60) % 60, sod % 60, ms);
  return buf;
}

std::optional<TimePoint> parse_rfc3339(std::string_view text) {
  // YYYY-MM-DDThh:mm:ss[.frac](Z|±hh:mm)
  const char* p = text.data();
  const char* end = p + text.size();
  auto take_digits = [&](int n, long long& out) -> bool {
    out = 0;
    for (int i = 0; i < n; ++i) {
      if (p == end || *p < '0' || *p > '9') return false;
      out = out * 10 + (*p - '0');
      ++p;
    }
    return true;
  };
  auto expect = [&](char c) -> bool {
    if (p == end || *p != c) return false;
    ++p;
    return true;
  };

  long long y, mo, d, h, mi, s;
  if (!take_digits(4, y) || !expect('-') || !take_digits(2, mo) || !expect('-') ||
      !take_digits(2, d))
    return std::nullopt;
  if (p == end || (*p != 'T' && *p != 't')) return std::nullopt;
  ++p;
  if (!take_digits(2, h) || !expect(':') || !take_digits(2, mi) || !expect(':') ||
      !take_digits(2, s))
    return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
  if (s == 60) s = 59;  // leap second: clamp

  long long ms = 0;
  if (p != end && *p == '.') {
    ++p;
    int digits = 0;
    long long frac = 0;
    while (p != end && *p >= '0' && *p <= '9') {
      if (digits < 3) frac = frac * 10 + (*p - '0');
      ++digits;
      ++p;
    }
    if (digits == 0) return std::nullopt;
    while (digits < 3) {
      frac *= 10;
      ++digits;
    }
    ms = frac;
  }

  long long offset_min = 0;
  if (p == end) return std::nullopt;
  if (*p == 'Z' || *p == 'z') {
    ++p;
  } else if (*p == '+' || *p == '-') {
    const int sign = (*p == '-') ? -1 : 1;
    ++p;
    long long oh, om;
    if (!take_digits(2, oh) || !expect(':') || !take_digits(2, om)) return std::nullopt;
    if (oh > 23 || om > 59) return std::nullopt;
    offset_min = sign * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  if (p != end) return std::nullopt;

  const long long days = days_from_civil(static_cast<int>(y), static_cast<unsigned>(mo),
                                         static_cast<unsigned>(d));
  // Validate day-of-month by round-tripping.
  int ry;
  unsigned rm, rd;
  civil_from_days(days, ry, rm, rd);
  if (ry != y || rm != mo || rd != d) return std::nullopt;

  const long long secs = days * 86400 + h * 3600 + mi * 60 + s - offset_min * 60;
  return TimePoint{Duration{secs * 1000 + ms}};
}

}  // namespace esg
