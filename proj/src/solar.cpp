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

#include "planetnerf/solar.hpp"

#include <cmath>
#include <cstdio>

namespace planetnerf {

namespace {

struct LowPrecisionSolar {
  double declination_rad;
  double equation_of_time_min;
};

// Fractional-year series. gamma is anchored at the J2000 epoch and advances
// with the mean tropical year, which keeps the seasonal phase locked across
// the whole 1950-2100 window (a calendar-based fraction drifts with the leap
// cycle and costs several tenths of a degree at the edges).
LowPrecisionSolar low_precision_solar(const DateTimeUtc& t) {
  constexpr double kTropicalYearDays = 365.24219;
  const double years = (julian_day(t) - 2451545.0) / kTropicalYearDays;
  const double gamma = 2.0 * kPi * (years - std::floor(years));
  LowPrecisionSolar out;
  out.equation_of_time_min =
      229.18 * (0.000075 + 0.001868 * std::cos(gamma) - 0.032077 * std::sin(gamma) -
                0.014615 * std::cos(2 * gamma) - 0.040849 * std::sin(2 * gamma));
  out.declination_rad = 0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
                        0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma) -
                        0.002697 * std::cos(3 * gamma) + 0.00148 * std::sin(3 * gamma);
  return out;
}

double wrap_longitude(double lon) {
  while (lon <= -180.0) lon += 360.0;
  while (lon > 180.0) lon -= 360.0;
  return lon;
}

Eigen::Vector3d enu_from_decl_hour_angle(double decl_rad, double hour_angle_rad, double lat_rad) {
  const double sd = std::sin(decl_rad), cd = std::cos(decl_rad);
  const double sl = std::sin(lat_rad), cl = std::cos(lat_rad);
  const double sh = std::sin(hour_angle_rad), ch = std::cos(hour_angle_rad);
  Eigen::Vector3d enu;
  enu.x() = -cd * sh;
  enu.y() = sd * cl - cd * sl * ch;
  enu.z() = sd * sl + cd * cl * ch;
  return enu;
}

}  // namespace

double solar_declination_deg(const DateTimeUtc& instant) {
  return rad2deg(low_precision_solar(instant).declination_rad);
}

Eigen::Vector3d sun_direction(const SolarQuery& query) {
  const DateTimeUtc& t = query.instant;
  if (t.year < 1950 || t.year > 2100)
    throw ValidationError("instant outside the 1950-2100 validity window");
  if (std::abs(query.latitude_deg) > 90.0)
    throw ValidationError("latitude out of range: " + std::to_string(query.latitude_deg));
  const double lon = wrap_longitude(query.longitude_deg);

  const LowPrecisionSolar sol = low_precision_solar(t);
  const double utc_minutes = t.hour * 60.0 + t.minute + t.second / 60.0;
  // True solar time in minutes; 4 minutes per degree of longitude.
  const double tst = utc_minutes + 4.0 * lon + sol.equation_of_time_min;
  const double hour_angle_deg = tst / 4.0 - 180.0;

  Eigen::Vector3d enu = enu_from_decl_hour_angle(sol.declination_rad, deg2rad(hour_angle_deg),
                                                 deg2rad(query.latitude_deg));
  return enu.normalized();
}

std::vector<SunSample> sun_sweep(int year, int month, const std::vector<int>& days,
                                 double hour_utc, double latitude_deg, double longitude_deg) {
  if (month < 1 || month > 12) throw ValidationError("month out of range");
  std::vector<SunSample> out;
  for (int day : days) {
    if (day < 1 || day > days_in_month(year, month))
      throw ValidationError("invalid day " + std::to_string(day) + " for month " +
                            std::to_string(month));
    SunSample s;
    s.instant.year = year;
    s.instant.month = month;
    s.instant.day = day;
    s.instant.hour = static_cast<int>(hour_utc);
    s.instant.minute = static_cast<int>(std::lround((hour_utc - s.instant.hour) * 60.0));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", year, month, day, s.instant.hour,
                  s.instant.minute);
    s.label = buf;
    s.enu = sun_direction({s.instant, latitude_deg, longitude_deg});
    enu_to_azel(s.enu, &s.azimuth_deg, &s.elevation_deg);
    out.push_back(std::move(s));
  }
  return out;
}

Eigen::Vector3d azel_to_enu(double azimuth_deg, double elevation_deg) {
  const double az = deg2rad(azimuth_deg), el = deg2rad(elevation_deg);
  return {std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el)};
}

void enu_to_azel(const Eigen::Vector3d& enu, double* azimuth_deg, double* elevation_deg) {
  *elevation_deg = rad2deg(std::asin(std::clamp(enu.z(), -1.0, 1.0)));
  double az = rad2deg(std::atan2(enu.x(), enu.y()));
  if (az < 0.0) az += 360.0;
  *azimuth_deg = az;
}

}  // namespace planetnerf
