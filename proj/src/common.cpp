// Copyright 2026 planetnerf contributors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "planetnerf/common.hpp"

#include <cmath>
#include <cstdio>

namespace planetnerf {

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
  static const int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) throw ValidationError("month out of range: " + std::to_string(month));
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

int day_of_year(const DateTimeUtc& t) {
  int doy = t.day;
  for (int m = 1; m < t.month; ++m) doy += days_in_month(t.year, m);
  return doy;
}

double julian_day(const DateTimeUtc& t) {
  // Fliegel & Van Flandern, Gregorian calendar.
  int a = (14 - t.month) / 12;
  int y = t.year + 4800 - a;
  int m = t.month + 12 * a - 3;
  long jdn = t.day + (153 * m + 2) / 5 + 365L * y + y / 4 - y / 100 + y / 400 - 32045;
  double frac = (t.hour - 12.0) / 24.0 + t.minute / 1440.0 + t.second / 86400.0;
  return static_cast<double>(jdn) + frac;
}

namespace {

// Normalizes the calendar fields after adding a signed minute offset.
DateTimeUtc add_minutes(DateTimeUtc t, int minutes) {
  int total = t.hour * 60 + t.minute + minutes;
  int day_shift = 0;
  while (total < 0) {
    total += 24 * 60;
    --day_shift;
  }
  day_shift += total / (24 * 60);
  total %= 24 * 60;
  t.hour = total / 60;
  t.minute = total % 60;
  t.day += day_shift;
  while (t.day > days_in_month(t.year, t.month)) {
    t.day -= days_in_month(t.year, t.month);
    if (++t.month > 12) {
      t.month = 1;
      ++t.year;
    }
  }
  while (t.day < 1) {
    if (--t.month < 1) {
      t.month = 12;
      --t.year;
    }
    t.day += days_in_month(t.year, t.month);
  }
  return t;
}

}  // namespace

DateTimeUtc parse_iso8601_utc(const std::string& text) {
  DateTimeUtc t;
  int consumed = 0;
  int fields = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d%n", &t.year, &t.month, &t.day, &t.hour,
                           &t.minute, &consumed);
  if (fields != 5) throw ValidationError("malformed ISO-8601 date-time: '" + text + "'");
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < text.size() && text[pos] == ':') {
    ++pos;
    std::size_t end = pos;
    while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.')) ++end;
    t.second = std::stod(text.substr(pos, end - pos));
    pos = end;
  }
  if (pos >= text.size()) throw ValidationError("missing UTC offset in '" + text + "'");
  int offset_min = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    int sign = text[pos] == '+' ? 1 : -1;
    int oh = 0, om = 0;
    int n = std::sscanf(text.c_str() + pos + 1, "%d:%d", &oh, &om);
    if (n < 1) throw ValidationError("malformed UTC offset in '" + text + "'");
    offset_min = sign * (oh * 60 + om);
    pos = text.size();
  } else {
    throw ValidationError("malformed UTC offset in '" + text + "'");
  }
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > days_in_month(t.year, t.month) ||
      t.hour > 23 || t.minute > 59 || t.second < 0.0 || t.second >= 61.0) {
    throw ValidationError("calendar fields out of range in '" + text + "'");
  }
  // Convert local-offset time to UTC.
  return add_minutes(t, -offset_min);
}

std::string format_iso8601_utc(const DateTimeUtc& t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%06.3fZ", t.year, t.month, t.day,
                t.hour, t.minute, t.second);
  return buf;
}

}  // namespace planetnerf
