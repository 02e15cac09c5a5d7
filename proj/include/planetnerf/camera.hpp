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
#include <variant>
#include <vector>

#include "planetnerf/geometry.hpp"
#include "planetnerf/rpc.hpp"

namespace planetnerf {

// Perspective camera in the local metric frame. pose maps world to camera:
// x_cam = R x_world + t. Pixel (row, col) corresponds to homogeneous image
// point (col, row, 1) through the intrinsics.
struct PinholeCamera {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int width = 0;
  int height = 0;

  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

  static PinholeCamera look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                               double focal_px, int width, int height);
};

struct Camera {
  std::variant<PinholeCamera, RpcModel> model;
  int width() const;
  int height() const;
  bool is_rpc() const { return std::holds_alternative<RpcModel>(model); }
};

// Builds altitude-bounded rays in normalized scene coordinates. For RPC
// cameras the ray is the line through localize(pixel, alt_max) and
// localize(pixel, alt_min); for pinhole cameras the ray leaves the camera
// center, clipped to the altitude slab.
std::vector<Ray> rays_from_camera(const Camera& camera,
                                  const std::vector<std::pair<int, int>>& pixels,
                                  double alt_min, double alt_max, const LocalFrame& frame,
                                  const SceneNormalization& norm);

Ray ray_for_pixel(const Camera& camera, double row, double col, double alt_min, double alt_max,
                  const LocalFrame& frame, const SceneNormalization& norm);

}  // namespace planetnerf
