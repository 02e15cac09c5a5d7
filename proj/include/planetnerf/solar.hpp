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

#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "planetnerf/common.hpp"

namespace planetnerf {

struct SolarQuery {
  DateTimeUtc instant;
  double latitude_deg = 0.0;   // |lat| <= 90
  double longitude_deg = 0.0;  // wrapped to (-180, 180], east positive
};

// Unit vector from the ground toward the sun in the local east/north/up
// frame. Low-precision almanac formulation (fractional-year Fourier series
// for declination and the equation of time); valid 1950-2100, within 0.5
// degrees of a high-precision ephemeris.
Eigen::Vector3d sun_direction(const SolarQuery& query);

// Apparent solar declination in degrees for the query instant.
double solar_declination_deg(const DateTimeUtc& instant);

struct SunSample {
  std::string label;  // e.g. "2019-03-15T17:00"
  DateTimeUtc instant;
  Eigen::Vector3d enu;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
};

// Directions for a list of days in one month at a fixed UTC hour.
std::vector<SunSample> sun_sweep(int year, int month, const std::vector<int>& days,
                                 double hour_utc, double latitude_deg, double longitude_deg);

// (azimuth from north, clockwise; elevation above horizon) in degrees.
Eigen::Vector3d azel_to_enu(double azimuth_deg, double elevation_deg);
void enu_to_azel(const Eigen::Vector3d& enu, double* azimuth_deg, double* elevation_deg);

}  // namespace planetnerf
