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

#include "planetnerf/camera.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace planetnerf {

PinholeCamera PinholeCamera::look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                                     double focal_px, int width, int height) {
  PinholeCamera cam;
  cam.width = width;
  cam.height = height;
  cam.intrinsics << focal_px, 0, (width - 1) * 0.5, 0, focal_px, (height - 1) * 0.5, 0, 0, 1;
  // Camera axes: +z along the view direction, +x right (image col), +y down
  // (image row). North (+y world) maps toward -row so north is up in images.
  Eigen::Vector3d forward = (target - position).normalized();
  Eigen::Vector3d world_north(0, 1, 0);
  Eigen::Vector3d right = forward.cross(world_north).normalized();
  if (right.norm() < 1e-9) right = Eigen::Vector3d(1, 0, 0);
  Eigen::Vector3d down = forward.cross(right).normalized();
  Eigen::Matrix3d r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = forward;
  cam.rotation = r;
  cam.translation = -r * position;
  return cam;
}

int Camera::width() const {
  return std::visit([](const auto& m) { return m.width; }, model);
}

int Camera::height() const {
  return std::visit([](const auto& m) { return m.height; }, model);
}

namespace {

Ray finish_ray(const Eigen::Vector3d& p_high_m, const Eigen::Vector3d& p_low_m, double alt_min,
               double alt_max, const SceneNormalization& norm, int row, int col) {
  Ray ray;
  const Eigen::Vector3d a = norm.normalize(p_high_m);
  const Eigen::Vector3d b = norm.normalize(p_low_m);
  const Eigen::Vector3d d = b - a;
  const double len = d.norm();
  if (len < 1e-15) throw ValidationError("degenerate ray: altitude endpoints coincide");
  ray.origin = a;
  ray.direction = d / len;
  ray.t_near = 0.0;
  ray.t_far = len;
  ray.alt0_m = alt_max;
  ray.alt_slope_m = (alt_min - alt_max) / len;
  ray.pixel_row = row;
  ray.pixel_col = col;
  return ray;
}

Ray pinhole_ray(const PinholeCamera& cam, double row, double col, double alt_min, double alt_max,
                const SceneNormalization& norm) {
  const Eigen::Vector3d dir_cam = cam.intrinsics.inverse() * Eigen::Vector3d(col, row, 1.0);
  const Eigen::Vector3d dir_world = (cam.rotation.transpose() * dir_cam).normalized();
  const Eigen::Vector3d origin = cam.center();
  if (std::abs(dir_world.z()) < 1e-9)
    throw ValidationError("pinhole ray parallel to the altitude slab");
  const double t_high = (alt_max - origin.z()) / dir_world.z();
  const double t_low = (alt_min - origin.z()) / dir_world.z();
  const Eigen::Vector3d p_high = origin + t_high * dir_world;
  const Eigen::Vector3d p_low = origin + t_low * dir_world;
  return finish_ray(p_high, p_low, alt_min, alt_max, norm, static_cast<int>(std::lround(row)),
                    static_cast<int>(std::lround(col)));
}

Ray rpc_ray(const RpcModel& rpc, double row, double col, double alt_min, double alt_max,
            const LocalFrame& frame, const SceneNormalization& norm) {
  const GeoCoord high = rpc_localize(rpc, row, col, alt_max);
  const GeoCoord low = rpc_localize(rpc, row, col, alt_min);
  const Eigen::Vector3d p_high = frame.to_local(high.lat_deg, high.lon_deg, alt_max);
  const Eigen::Vector3d p_low = frame.to_local(low.lat_deg, low.lon_deg, alt_min);
  return finish_ray(p_high, p_low, alt_min, alt_max, norm, static_cast<int>(std::lround(row)),
                    static_cast<int>(std::lround(col)));
}

}  // namespace

Ray ray_for_pixel(const Camera& camera, double row, double col, double alt_min, double alt_max,
                  const LocalFrame& frame, const SceneNormalization& norm) {
  if (alt_min >= alt_max) throw ValidationError("alt_min must be below alt_max");
  if (const auto* pin = std::get_if<PinholeCamera>(&camera.model))
    return pinhole_ray(*pin, row, col, alt_min, alt_max, norm);
  const auto& rpc = std::get<RpcModel>(camera.model);
  try {
    return rpc_ray(rpc, row, col, alt_min, alt_max, frame, norm);
  } catch (const LocalizationError& e) {
    throw LocalizationError("pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                            "): " + e.what());
  }
}

std::vector<Ray> rays_from_camera(const Camera& camera,
                                  const std::vector<std::pair<int, int>>& pixels,
                                  double alt_min, double alt_max, const LocalFrame& frame,
                                  const SceneNormalization& norm) {
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (const auto& [r, c] : pixels)
    rays.push_back(ray_for_pixel(camera, r, c, alt_min, alt_max, frame, norm));
  return rays;
}

}  // namespace planetnerf
