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

#include "planetnerf/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "planetnerf/solar.hpp"

namespace planetnerf {

using Eigen::Vector3d;

void SyntheticSceneSpec::validate() const {
  if (grid_size <= 0) throw ValidationError("grid size must be positive");
  if (num_views <= 0) throw ValidationError("number of views must be positive");
  if (!(alt_max_m > alt_min_m)) throw ValidationError("altitude range must be positive");
  if (extent_m <= 0.0) throw ValidationError("extent must be positive");
  for (const auto& rgb : month_palette)
    if ((rgb.array() < 0.0).any() || (rgb.array() > 1.0).any())
      throw ValidationError("palette values must lie in [0,1]");
  for (int m : snow_months)
    if (m < 1 || m > 12) throw ValidationError("snow month out of range");
  auto check_len = [&](std::size_t n, const char* what) {
    if (n != 0 && n != static_cast<std::size_t>(num_views))
      throw ValidationError(std::string(what) + " list length disagrees with num_views");
  };
  check_len(view_months.size(), "view_months");
  check_len(view_days.size(), "view_days");
  check_len(view_hours_utc.size(), "view_hours_utc");
  check_len(view_is_test.size(), "view_is_test");
}

std::array<Vector3d, 12> seasonal_palette() {
  return {Vector3d{0.90, 0.91, 0.94}, Vector3d{0.88, 0.89, 0.92}, Vector3d{0.45, 0.52, 0.30},
          Vector3d{0.36, 0.62, 0.26}, Vector3d{0.28, 0.66, 0.24}, Vector3d{0.22, 0.62, 0.20},
          Vector3d{0.24, 0.56, 0.18}, Vector3d{0.33, 0.52, 0.20}, Vector3d{0.52, 0.44, 0.20},
          Vector3d{0.58, 0.38, 0.16}, Vector3d{0.54, 0.42, 0.28}, Vector3d{0.92, 0.93, 0.95}};
}

std::array<Vector3d, 12> equinox_palette() {
  auto p = seasonal_palette();
  p[2] = {0.18, 0.66, 0.18};  // March: vivid green
  p[8] = {0.56, 0.36, 0.16};  // September: brown
  return p;
}

std::array<Vector3d, 12> flat_palette(const Vector3d& rgb) {
  std::array<Vector3d, 12> p;
  p.fill(rgb);
  return p;
}

SyntheticOracle::SyntheticOracle(const SyntheticSceneSpec& spec, std::uint64_t seed)
    : spec_(spec) {
  spec_.validate();
  auto rng = seeded_rng(spec.height_field_seed ^ seed, "height_field");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double range = spec.alt_max_m - spec.alt_min_m;
  base_height_ = spec.alt_min_m + 0.5 * range;
  double amp_total = 0.0;
  for (int i = 0; i < 4; ++i) {
    amp_[i] = (0.5 + 0.5 * u(rng)) * 0.30 * range / (i + 1);
    wx_[i] = (0.04 + 0.08 * u(rng)) * (i + 1);
    wy_[i] = (0.04 + 0.08 * u(rng)) * (i + 1);
    px_[i] = 2.0 * kPi * u(rng);
    py_[i] = 2.0 * kPi * u(rng);
    amp_total += amp_[i];
  }
  // Keep the surface strictly inside the altitude slab.
  const double margin = 0.1 * range;
  if (amp_total > 0.5 * range - margin) {
    const double scale = (0.5 * range - margin) / amp_total;
    for (double& a : amp_) a *= scale;
  }
  tex_kx_ = 0.5 + 0.4 * u(rng);
  tex_ky_ = 0.5 + 0.4 * u(rng);
  tex_px_ = 2.0 * kPi * u(rng);
  tex_py_ = 2.0 * kPi * u(rng);
  tex2_kx_ = 1.8 + 0.6 * u(rng);
  tex2_ky_ = 1.8 + 0.6 * u(rng);
  tex2_px_ = 2.0 * kPi * u(rng);
  tex2_py_ = 2.0 * kPi * u(rng);
}

double SyntheticOracle::surface_height(double x, double y) const {
  double h = base_height_;
  for (int i = 0; i < 4; ++i)
    h += amp_[i] * std::sin(wx_[i] * x + px_[i]) * std::sin(wy_[i] * y + py_[i]);
  return h;
}

Vector3d SyntheticOracle::surface_normal(double x, double y) const {
  double dhdx = 0.0, dhdy = 0.0;
  for (int i = 0; i < 4; ++i) {
    dhdx += amp_[i] * wx_[i] * std::cos(wx_[i] * x + px_[i]) * std::sin(wy_[i] * y + py_[i]);
    dhdy += amp_[i] * wy_[i] * std::sin(wx_[i] * x + px_[i]) * std::cos(wy_[i] * y + py_[i]);
  }
  return Vector3d(-dhdx, -dhdy, 1.0).normalized();
}

bool SyntheticOracle::is_road(double x, double y) const {
  auto dist_to_grid = [&](double v) {
    const double f = v / road_period_ - std::floor(v / road_period_);
    return std::min(f, 1.0 - f) * road_period_;
  };
  return dist_to_grid(x) < road_half_width_ || dist_to_grid(y) < road_half_width_;
}

Vector3d SyntheticOracle::surface_color(double x, double y, int month,
                                        const Vector3d& d_sun) const {
  if (month < 1 || month > 12) throw ValidationError("month out of range");
  static const Vector3d kRoad(0.34, 0.34, 0.36);
  static const Vector3d kSnow(0.92, 0.93, 0.95);
  Vector3d albedo;
  if (is_road(x, y)) {
    albedo = kRoad;
    if (spec_.snow_months.count(month))
      albedo += 0.5 * spec_.snow_blend * (kSnow - albedo);
  } else {
    double tex = 1.0 -
                 spec_.texture_amplitude * (0.5 + 0.5 * std::sin(tex_kx_ * x + tex_px_) *
                                                      std::sin(tex_ky_ * y + tex_py_)) -
                 spec_.texture2_amplitude * (0.5 + 0.5 * std::sin(tex2_kx_ * x + tex2_px_) *
                                                       std::sin(tex2_ky_ * y + tex2_py_));
    tex = std::max(tex, 0.05);
    albedo = spec_.month_palette[month - 1] * tex;
    if (spec_.snow_months.count(month)) albedo += spec_.snow_blend * (kSnow - albedo);
  }
  const double lambert = std::max(0.0, surface_normal(x, y).dot(d_sun.normalized()));
  const double shade = spec_.ambient + (1.0 - spec_.ambient) * lambert;
  return albedo * shade;
}

double SyntheticOracle::density(const Vector3d& p) const {
  return p.z() < surface_height(p.x(), p.y()) ? 5.0 : 0.0;
}

Vector3d SyntheticOracle::color(const Vector3d& p, int month, const Vector3d& d_sun) const {
  return surface_color(p.x(), p.y(), month, d_sun);
}

std::optional<double> SyntheticOracle::intersect(const Ray& ray,
                                                 const SceneNormalization& norm) const {
  auto above = [&](double t) {
    const Vector3d p = norm.denormalize(ray.point_at(t));
    return p.z() - surface_height(p.x(), p.y());
  };
  const int steps = 4 * spec_.grid_size;
  const double dt = (ray.t_far - ray.t_near) / steps;
  double t_prev = ray.t_near;
  double f_prev = above(t_prev);
  if (f_prev <= 0.0) return t_prev;
  for (int i = 1; i <= steps; ++i) {
    const double t = ray.t_near + i * dt;
    const double f = above(t);
    if (f <= 0.0) {
      double lo = t_prev, hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    t_prev = t;
    f_prev = f;
  }
  return std::nullopt;
}

namespace {

struct ViewPlan {
  int month;
  int day;
  double hour_utc;
  bool is_test;
  double tilt_rad;
  double azimuth_rad;
};

std::vector<ViewPlan> plan_views(const SyntheticSceneSpec& spec, std::uint64_t seed) {
  auto rng = seeded_rng(seed, "views");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  static const double kHourCycle[5] = {17.0, 15.0, 19.0, 13.0, 11.0};
  std::vector<ViewPlan> plans;
  for (int v = 0; v < spec.num_views; ++v) {
    ViewPlan p;
    p.month = spec.view_months.empty() ? (v % 12) + 1 : spec.view_months[v];
    if (p.month < 1 || p.month > 12) throw ValidationError("view month out of range");
    p.day = spec.view_days.empty() ? 15 : spec.view_days[v];
    p.hour_utc = spec.view_hours_utc.empty() ? kHourCycle[(v / 12) % 5] : spec.view_hours_utc[v];
    p.is_test = spec.view_is_test.empty() ? false : spec.view_is_test[v];
    p.tilt_rad = deg2rad(spec.min_tilt_deg + (spec.max_tilt_deg - spec.min_tilt_deg) * u(rng));
    p.azimuth_rad = 2.0 * kPi * u(rng);
    plans.push_back(p);
  }
  return plans;
}

Camera make_view_camera(const SyntheticSceneSpec& spec, const ViewPlan& plan,
                        const LocalFrame& frame) {
  const int g = spec.grid_size;
  const double mid_alt = 0.5 * (spec.alt_min_m + spec.alt_max_m);
  if (spec.camera_kind == CameraKind::kPinhole) {
    const double footprint = spec.extent_m * 1.15;
    const double focal = g * spec.camera_height_m / footprint;
    const Vector3d offset(spec.camera_height_m * std::tan(plan.tilt_rad) * std::sin(plan.azimuth_rad),
                          spec.camera_height_m * std::tan(plan.tilt_rad) * std::cos(plan.azimuth_rad),
                          spec.camera_height_m);
    PinholeCamera cam = PinholeCamera::look_at(Vector3d(0, 0, mid_alt) + offset,
                                               Vector3d(0, 0, mid_alt), focal, g, g);
    return Camera{cam};
  }
  // Affine RPC: purely linear terms, one oblique parallax direction per view.
  const double half_m = 0.5 * spec.extent_m * 1.15;
  const double cos_lat = std::cos(deg2rad(spec.latitude_deg));
  RpcModel rpc = RpcModel::affine(
      spec.latitude_deg, half_m / LocalFrame::kMetersPerDegree, spec.longitude_deg,
      half_m / (cos_lat * LocalFrame::kMetersPerDegree), mid_alt,
      0.6 * (spec.alt_max_m - spec.alt_min_m), (g - 1) * 0.5, (g - 1) * 0.5, (g - 1) * 0.5,
      (g - 1) * 0.5);
  rpc.width = g;
  rpc.height = g;
  // row grows southward; parallax shifts the footprint with altitude.
  rpc.row_num[2] = -1.0;
  rpc.row_num[3] = -std::tan(plan.tilt_rad) * std::cos(plan.azimuth_rad) * rpc.alt_scale / half_m;
  rpc.col_num[3] = std::tan(plan.tilt_rad) * std::sin(plan.azimuth_rad) * rpc.alt_scale / half_m;
  (void)frame;
  return Camera{rpc};
}

}  // namespace

SyntheticScene generate_synthetic_scene(const SyntheticSceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticOracle oracle(spec, seed);
  SceneDataset ds;
  ds.frame = LocalFrame{spec.latitude_deg, spec.longitude_deg};
  const double half = 0.5 * spec.extent_m * 1.2;
  ds.bounds.lo = {-half, -half, spec.alt_min_m};
  ds.bounds.hi = {half, half, spec.alt_max_m};
  const SceneNormalization norm(ds.bounds);

  const std::vector<ViewPlan> plans = plan_views(spec, seed);
  for (std::size_t v = 0; v < plans.size(); ++v) {
    const ViewPlan& plan = plans[v];
    ImageRecord rec;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "SYN_%03zu_m%02d", v, plan.month);
    rec.id = idbuf;
    const int hour = static_cast<int>(plan.hour_utc);
    const int minute = static_cast<int>(std::lround((plan.hour_utc - hour) * 60.0));
    char datebuf[40];
    std::snprintf(datebuf, sizeof(datebuf), "%04d-%02d-%02dT%02d:%02d:00Z", spec.year, plan.month,
                  plan.day, hour, minute);
    rec.acquisition_date_raw = datebuf;
    rec.acquired = parse_iso8601_utc(rec.acquisition_date_raw);
    rec.month_index = rec.acquired.month;
    if (spec.fixed_sun_azel)
      rec.sun_dir_enu = azel_to_enu(spec.fixed_sun_azel->first, spec.fixed_sun_azel->second);
    else
      rec.sun_dir_enu = sun_direction({rec.acquired, spec.latitude_deg, spec.longitude_deg});
    enu_to_azel(rec.sun_dir_enu, &rec.sun_azimuth_deg, &rec.sun_elevation_deg);
    rec.camera = make_view_camera(spec, plan, ds.frame);
    rec.source_format = PixelFormat::kF32;

    const int g = spec.grid_size;
    rec.pixels = Image(g, g, 3);
    for (int r = 0; r < g; ++r) {
      for (int c = 0; c < g; ++c) {
        const Ray ray = ray_for_pixel(rec.camera, r, c, spec.alt_min_m, spec.alt_max_m, ds.frame,
                                      norm);
        const auto t_hit = oracle.intersect(ray, norm);
        Vector3d color = Vector3d::Zero();
        if (t_hit) {
          const Vector3d p = norm.denormalize(ray.point_at(*t_hit));
          color = oracle.surface_color(p.x(), p.y(), plan.month, rec.sun_dir_enu);
        }
        for (int ch = 0; ch < 3; ++ch) rec.pixels.at(r, c, ch) = color[ch];
      }
    }
    ds.images.push_back(std::move(rec));
    ds.split.push_back(plan.is_test ? SplitLabel::kTest : SplitLabel::kTrain);
  }

  // Ground-truth DSM over the terrain footprint.
  {
    const int cells = static_cast<int>(std::lround(spec.extent_m * 1.2 / spec.dsm_resolution_m));
    AltitudeRaster raster;
    raster.data = Image(cells, cells, 1);
    raster.transform.x0 = -half;
    raster.transform.y0 = half;
    raster.transform.dx = spec.dsm_resolution_m;
    raster.transform.dy = spec.dsm_resolution_m;
    for (int r = 0; r < cells; ++r) {
      for (int c = 0; c < cells; ++c) {
        const double x = raster.transform.x0 + (c + 0.5) * raster.transform.dx;
        const double y = raster.transform.y0 - (r + 0.5) * raster.transform.dy;
        raster.data.at(r, c) = oracle.surface_height(x, y);
      }
    }
    ds.gt_altitude = std::move(raster);
  }

  ds.validate();
  return SyntheticScene{std::move(ds), std::move(oracle)};
}

void write_oracle_manifest(const std::string& path, const SyntheticSceneSpec& spec,
                           std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  j["grid_size"] = spec.grid_size;
  j["height_field_seed"] = spec.height_field_seed;
  nlohmann::json palette = nlohmann::json::array();
  for (const auto& rgb : spec.month_palette) palette.push_back({rgb.x(), rgb.y(), rgb.z()});
  j["month_palette"] = palette;
  j["snow_months"] = std::vector<int>(spec.snow_months.begin(), spec.snow_months.end());
  j["ambient"] = spec.ambient;
  j["snow_blend"] = spec.snow_blend;
  j["texture_amplitude"] = spec.texture_amplitude;
  j["texture2_amplitude"] = spec.texture2_amplitude;
  j["min_tilt_deg"] = spec.min_tilt_deg;
  j["max_tilt_deg"] = spec.max_tilt_deg;
  j["num_views"] = spec.num_views;
  j["view_months"] = spec.view_months;
  j["view_days"] = spec.view_days;
  j["view_hours_utc"] = spec.view_hours_utc;
  std::vector<int> test_flags(spec.view_is_test.begin(), spec.view_is_test.end());
  j["view_is_test"] = test_flags;
  j["camera_kind"] = spec.camera_kind == CameraKind::kPinhole ? "pinhole" : "rpc";
  j["latitude_deg"] = spec.latitude_deg;
  j["longitude_deg"] = spec.longitude_deg;
  j["year"] = spec.year;
  j["extent_m"] = spec.extent_m;
  j["alt_min_m"] = spec.alt_min_m;
  j["alt_max_m"] = spec.alt_max_m;
  j["dsm_resolution_m"] = spec.dsm_resolution_m;
  j["camera_height_m"] = spec.camera_height_m;
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write oracle manifest: " + path);
  f << j.dump(2) << "\n";
}

SyntheticOracle oracle_from_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open oracle manifest: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, "-", e.what());
  }
  SyntheticSceneSpec spec;
  spec.grid_size = j.at("grid_size");
  spec.height_field_seed = j.at("height_field_seed");
  const auto palette = j.at("month_palette");
  for (int m = 0; m < 12; ++m)
    spec.month_palette[m] = Eigen::Vector3d(palette[m][0], palette[m][1], palette[m][2]);
  for (int m : j.at("snow_months").get<std::vector<int>>()) spec.snow_months.insert(m);
  spec.ambient = j.at("ambient");
  spec.snow_blend = j.at("snow_blend");
  spec.texture_amplitude = j.at("texture_amplitude");
  spec.texture2_amplitude = j.at("texture2_amplitude");
  spec.min_tilt_deg = j.at("min_tilt_deg");
  spec.max_tilt_deg = j.at("max_tilt_deg");
  spec.num_views = j.at("num_views");
  spec.view_months = j.at("view_months").get<std::vector<int>>();
  spec.view_days = j.at("view_days").get<std::vector<int>>();
  spec.view_hours_utc = j.at("view_hours_utc").get<std::vector<double>>();
  for (int flag : j.at("view_is_test").get<std::vector<int>>())
    spec.view_is_test.push_back(flag != 0);
  spec.camera_kind = j.at("camera_kind") == "rpc" ? CameraKind::kRpc : CameraKind::kPinhole;
  spec.latitude_deg = j.at("latitude_deg");
  spec.longitude_deg = j.at("longitude_deg");
  spec.year = j.at("year");
  spec.extent_m = j.at("extent_m");
  spec.alt_min_m = j.at("alt_min_m");
  spec.alt_max_m = j.at("alt_max_m");
  spec.dsm_resolution_m = j.at("dsm_resolution_m");
  spec.camera_height_m = j.at("camera_height_m");
  return SyntheticOracle(spec, j.at("seed"));
}

}  // namespace planetnerf
