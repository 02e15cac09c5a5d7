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
#include <array>

#include "planetnerf/common.hpp"

namespace planetnerf {

// Rational polynomial camera. Each of the four coefficient sets weights the
// fixed 20-term cubic basis in normalized (L=lon, P=lat, H=alt):
//   1, L, P, H, LP, LH, PH, L^2, P^2, H^2,
//   LPH, L^3, LP^2, LH^2, L^2P, P^3, PH^2, L^2H, P^2H, H^3
struct RpcModel {
  std::array<double, 20> row_num{};
  std::array<double, 20> row_den{};
  std::array<double, 20> col_num{};
  std::array<double, 20> col_den{};
  double lat_off = 0.0, lat_scale = 1.0;
  double lon_off = 0.0, lon_scale = 1.0;
  double alt_off = 0.0, alt_scale = 1.0;
  double row_off = 0.0, row_scale = 1.0;
  double col_off = 0.0, col_scale = 1.0;
  int width = 0;   // image size, pixels
  int height = 0;

  // Identity on the normalized cube (row = row_off + row_scale * P, etc.),
  // useful as a base for synthetic models.
  static RpcModel affine(double lat_off, double lat_scale, double lon_off, double lon_scale,
                         double alt_off, double alt_scale, double row_off, double row_scale,
                         double col_off, double col_scale);
};

// Fixed term ordering shared by projection and its test oracles.
std::array<double, 20> rpc_terms(double lon_n, double lat_n, double alt_n);

struct PixelCoord {
  double row = 0.0;
  double col = 0.0;
};

// Geographic -> pixel through the ratio of cubics. Throws SingularityError if
// a denominator magnitude drops below 1e-12.
PixelCoord rpc_project(const RpcModel& model, double lat_deg, double lon_deg, double alt_m);

struct GeoCoord {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

// Inverse of rpc_project at a fixed altitude: damped Newton on the 2x2
// system in (lat, lon), numerical Jacobian, step clamp 0.5 normalized units,
// at most 50 iterations, reprojection residual below 1e-3 px on success.
GeoCoord rpc_localize(const RpcModel& model, double row, double col, double alt_m);

}  // namespace planetnerf
