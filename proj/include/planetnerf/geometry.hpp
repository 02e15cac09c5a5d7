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

#include "planetnerf/common.hpp"

namespace planetnerf {

// Local tangent frame anchored at (lat0, lon0): x east, y north, z up, in
// meters. Equirectangular at the anchor latitude; adequate for sub-km scenes.
struct LocalFrame {
  double lat0_deg = 0.0;
  double lon0_deg = 0.0;

  static constexpr double kMetersPerDegree = 111319.4908;  // WGS84 equatorial arc

  Eigen::Vector3d to_local(double lat_deg, double lon_deg, double alt_m) const {
    const double cos_lat0 = std::cos(deg2rad(lat0_deg));
    return {(lon_deg - lon0_deg) * cos_lat0 * kMetersPerDegree,
            (lat_deg - lat0_deg) * kMetersPerDegree, alt_m};
  }
  void to_geographic(const Eigen::Vector3d& p, double* lat_deg, double* lon_deg,
                     double* alt_m) const {
    const double cos_lat0 = std::cos(deg2rad(lat0_deg));
    *lon_deg = lon0_deg + p.x() / (cos_lat0 * kMetersPerDegree);
    *lat_deg = lat0_deg + p.y() / kMetersPerDegree;
    *alt_m = p.z();
  }
};

// Axis-aligned scene box in local meters (east, north, up).
struct SceneBounds {
  Eigen::Vector3d lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d hi = Eigen::Vector3d::Zero();

  double alt_min() const { return lo.z(); }
  double alt_max() const { return hi.z(); }
};

// Affine map sending the bounds box to the [-1,1]^3 cube the field consumes.
class SceneNormalization {
 public:
  SceneNormalization() = default;
  explicit SceneNormalization(const SceneBounds& bounds) : bounds_(bounds) {
    for (int i = 0; i < 3; ++i) {
      const double extent = bounds.hi[i] - bounds.lo[i];
      if (extent <= 0.0) throw ValidationError("zero-extent bounds axis");
      scale_[i] = 2.0 / extent;
    }
  }

  Eigen::Vector3d normalize(const Eigen::Vector3d& p_m) const {
    return ((p_m - bounds_.lo).array() * scale_.array() - 1.0).matrix();
  }
  Eigen::Vector3d denormalize(const Eigen::Vector3d& p_n) const {
    return (((p_n.array() + 1.0) / scale_.array()).matrix() + bounds_.lo);
  }
  // Direction vectors map through the linear part only (not renormalized).
  Eigen::Vector3d normalize_dir(const Eigen::Vector3d& d_m) const {
    return (d_m.array() * scale_.array()).matrix();
  }

  const SceneBounds& bounds() const { return bounds_; }
  // Altitude in meters of a normalized z coordinate.
  double altitude_of(double z_n) const { return (z_n + 1.0) / scale_.z() + bounds_.lo.z(); }

 private:
  SceneBounds bounds_;
  Eigen::Vector3d scale_ = Eigen::Vector3d::Ones();
};

// Ray through the normalized scene cube. altitude(t) = alt0_m + t * alt_slope_m
// recovers meters from the ray parameter, so the renderer can report expected
// altitude without a round trip through the normalization.
struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();     // normalized scene units
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();  // unit norm
  double t_near = 0.0;
  double t_far = 1.0;
  double alt0_m = 0.0;
  double alt_slope_m = 0.0;
  int pixel_row = 0;
  int pixel_col = 0;

  double altitude_at(double t) const { return alt0_m + t * alt_slope_m; }
  Eigen::Vector3d point_at(double t) const { return origin + t * direction; }
};

}  // namespace planetnerf
