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

#include <array>
#include <optional>
#include <set>

#include "planetnerf/dataset.hpp"

namespace planetnerf {

enum class CameraKind { kPinhole, kRpc };

// Procedural seasonal scene: a smooth analytic height field draped with a
// per-month palette, a mid-frequency texture, a road grid that ignores the
// seasons, and Lambertian sun shading with a fixed ambient floor.
struct SyntheticSceneSpec {
  int grid_size = 64;                  // image and DSM resolution (pixels per side)
  std::uint64_t height_field_seed = 7;
  std::array<Eigen::Vector3d, 12> month_palette;
  std::set<int> snow_months;           // months rendered snow-covered
  double ambient = 0.2;
  double snow_blend = 0.85;
  double texture_amplitude = 0.3;   // coarse band, ~9 m period
  double texture2_amplitude = 0.15;  // fine band, ~3 m period
  double min_tilt_deg = 3.0;  // off-nadir camera tilt range
  double max_tilt_deg = 12.0;
  int num_views = 12;
  std::vector<int> view_months;        // default: cycle 1..12
  std::vector<int> view_days;          // default: 15
  std::vector<double> view_hours_utc;  // default: 17, then 15/19/13/11 per cycle
  std::vector<bool> view_is_test;      // default: all train
  CameraKind camera_kind = CameraKind::kPinhole;
  // When set, every view uses this (azimuth, elevation) instead of the
  // ephemeris, decoupling illumination from the calendar.
  std::optional<std::pair<double, double>> fixed_sun_azel;
  double latitude_deg = 41.26;   // scene anchor; drives the sun ephemeris
  double longitude_deg = -95.93;
  int year = 2019;
  double extent_m = 64.0;        // terrain footprint covered by the views
  double alt_min_m = 0.0;
  double alt_max_m = 30.0;
  double dsm_resolution_m = 1.0;
  double camera_height_m = 400.0;

  void validate() const;
};

std::array<Eigen::Vector3d, 12> seasonal_palette();  // snowy Dec-Feb, green summer
std::array<Eigen::Vector3d, 12> equinox_palette();   // March vivid green, September brown
std::array<Eigen::Vector3d, 12> flat_palette(const Eigen::Vector3d& rgb);

// Exact generative model behind a synthetic dataset; the acceptance oracle.
class SyntheticOracle {
 public:
  SyntheticOracle(const SyntheticSceneSpec& spec, std::uint64_t seed);

  double surface_height(double x_m, double y_m) const;
  Eigen::Vector3d surface_normal(double x_m, double y_m) const;
  bool is_road(double x_m, double y_m) const;
  // Color of the surface point above (x, y) for a month and sun direction.
  Eigen::Vector3d surface_color(double x_m, double y_m, int month,
                                const Eigen::Vector3d& d_sun) const;
  // Volumetric view: density in 1/m (solid below the surface), color taken
  // from the surface column containing the point.
  double density(const Eigen::Vector3d& p_m) const;
  Eigen::Vector3d color(const Eigen::Vector3d& p_m, int month,
                        const Eigen::Vector3d& d_sun) const;
  // Ray parameter of the surface hit, bisected to ~1e-10; the ray is in
  // normalized coordinates with `norm` mapping back to meters.
  std::optional<double> intersect(const Ray& ray, const SceneNormalization& norm) const;

  const SyntheticSceneSpec& spec() const { return spec_; }

 private:
  SyntheticSceneSpec spec_;
  std::array<double, 4> amp_{}, wx_{}, wy_{}, px_{}, py_{};  // height-field waves
  double base_height_ = 0.0;
  double tex_kx_ = 0.0, tex_ky_ = 0.0, tex_px_ = 0.0, tex_py_ = 0.0;
  double tex2_kx_ = 0.0, tex2_ky_ = 0.0, tex2_px_ = 0.0, tex2_py_ = 0.0;
  double road_period_ = 24.0, road_half_width_ = 1.8;
};

struct SyntheticScene {
  SceneDataset dataset;
  SyntheticOracle oracle;
};

// Renders spec.num_views images of the oracle scene; deterministic per seed.
SyntheticScene generate_synthetic_scene(const SyntheticSceneSpec& spec, std::uint64_t seed);

// Oracle manifest: enough of the spec echoed to rebuild the oracle for tests.
void write_oracle_manifest(const std::string& path, const SyntheticSceneSpec& spec,
                           std::uint64_t seed);
SyntheticOracle oracle_from_manifest(const std::string& path);

}  // namespace planetnerf
