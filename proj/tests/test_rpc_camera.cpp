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

#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "planetnerf/camera.hpp"

using namespace planetnerf;

namespace {

// OMA-like validity box: ~250 m footprint, 30 m height range.
RpcModel base_model() {
  RpcModel m = RpcModel::affine(41.26, 0.00115, -95.93, 0.00153, 315.0, 15.0, 255.5, 255.5,
                                255.5, 255.5);
  m.width = 512;
  m.height = 512;
  return m;
}

// Perturbation scale per cubic term, indexed like rpc_terms. Terms that are
// nonlinear in altitude stay tiny: a physical line-of-sight is straight, so
// real models carry ~1e-6 there, and the straight-ray construction depends
// on it.
double term_scale(int term) {
  static const int kAltExp[20] = {0, 0, 0, 1, 0, 1, 1, 0, 0, 2, 1, 0, 0, 2, 0, 0, 2, 1, 1, 3};
  static const int kOrder[20] = {0, 1, 1, 1, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3};
  if (kAltExp[term] >= 2) return 1e-5;
  if (kAltExp[term] == 1 && kOrder[term] >= 2) return 1e-3;
  return kOrder[term] >= 2 ? 3e-3 : 2e-2;
}

RpcModel randomized_cubic(std::uint64_t seed) {
  RpcModel m = base_model();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 1; i < 20; ++i) {
    m.row_num[i] += term_scale(i) * u(rng);
    m.col_num[i] += term_scale(i) * u(rng);
    m.row_den[i] = 0.25 * term_scale(i) * u(rng);
    m.col_den[i] = 0.25 * term_scale(i) * u(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("affine rpc matches the encoded affine map") {
  const RpcModel m = base_model();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double lat = m.lat_off + m.lat_scale * u(rng);
    const double lon = m.lon_off + m.lon_scale * u(rng);
    const double alt = m.alt_off + m.alt_scale * u(rng);
    const PixelCoord px = rpc_project(m, lat, lon, alt);
    const double row_direct = m.row_off + m.row_scale * (lat - m.lat_off) / m.lat_scale;
    const double col_direct = m.col_off + m.col_scale * (lon - m.lon_off) / m.lon_scale;
    CHECK(std::abs(px.row - row_direct) < 1e-9);
    CHECK(std::abs(px.col - col_direct) < 1e-9);
  }
}

TEST_CASE("scene center of a standard model hits the pixel offsets exactly") {
  const RpcModel m = base_model();
  const PixelCoord px = rpc_project(m, m.lat_off, m.lon_off, m.alt_off);
  CHECK(px.row == doctest::Approx(m.row_off).epsilon(1e-12));
  CHECK(px.col == doctest::Approx(m.col_off).epsilon(1e-12));
}

TEST_CASE("scene center projects to the pixel offsets") {
  const RpcModel m = randomized_cubic(5);
  const PixelCoord px = rpc_project(m, m.lat_off, m.lon_off, m.alt_off);
  // All normalized terms except the constant vanish at the center.
  const double row_expected =
      m.row_off + m.row_scale * m.row_num[0] / m.row_den[0];
  const double col_expected =
      m.col_off + m.col_scale * m.col_num[0] / m.col_den[0];
  CHECK(std::abs(px.row - row_expected) < 1e-9);
  CHECK(std::abs(px.col - col_expected) < 1e-9);
}

TEST_CASE("randomized cubic rpc agrees with the brute-force evaluator") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int model_idx = 0; model_idx < 5; ++model_idx) {
    const RpcModel m = randomized_cubic(100 + model_idx);
    for (int i = 0; i < 100; ++i) {
      const double lat = m.lat_off + m.lat_scale * u(rng);
      const double lon = m.lon_off + m.lon_scale * u(rng);
      const double alt = m.alt_off + m.alt_scale * u(rng);
      const PixelCoord got = rpc_project(m, lat, lon, alt);
      const PixelCoord ref = oracles::rpc_project_brute(m, lat, lon, alt);
      CHECK(std::abs(got.row - ref.row) < 1e-9);
      CHECK(std::abs(got.col - ref.col) < 1e-9);
    }
  }
}

TEST_CASE("vanishing denominator raises a singularity error") {
  RpcModel m = base_model();
  m.row_den[0] = 0.0;  // denominator identically ~ linear terms only
  m.row_den[1] = 1e-13;
  CHECK_THROWS_AS(rpc_project(m, m.lat_off, m.lon_off, m.alt_off), SingularityError);
}

TEST_CASE("project/localize round trip on the affine model") {
  const RpcModel m = base_model();
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 50; ++i) {
    const double lat = m.lat_off + m.lat_scale * u(rng);
    const double lon = m.lon_off + m.lon_scale * u(rng);
    const double alt = m.alt_off + m.alt_scale * u(rng);
    const PixelCoord px = rpc_project(m, lat, lon, alt);
    const GeoCoord geo = rpc_localize(m, px.row, px.col, alt);
    CHECK(std::abs(geo.lat_deg - lat) < 1e-8);
    CHECK(std::abs(geo.lon_deg - lon) < 1e-8);
  }
}

TEST_CASE("project/localize reprojection residual on randomized cubics") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int model_idx = 0; model_idx < 5; ++model_idx) {
    const RpcModel m = randomized_cubic(200 + model_idx);
    for (int i = 0; i < 40; ++i) {
      const double row = m.row_off + m.row_scale * u(rng);
      const double col = m.col_off + m.col_scale * u(rng);
      const double alt = m.alt_off + m.alt_scale * u(rng);
      const GeoCoord geo = rpc_localize(m, row, col, alt);
      const PixelCoord back = rpc_project(m, geo.lat_deg, geo.lon_deg, alt);
      CHECK(std::hypot(back.row - row, back.col - col) < 1e-3);
    }
  }
}

TEST_CASE("pixel far outside the image raises a localization error") {
  const RpcModel m = base_model();
  CHECK_THROWS_AS(rpc_localize(m, 5000.0, 5000.0, m.alt_off), LocalizationError);
}

namespace {

SceneBounds oma_bounds() {
  SceneBounds b;
  b.lo = {-130.0, -130.0, 300.0};
  b.hi = {130.0, 130.0, 330.0};
  return b;
}

}  // namespace

TEST_CASE("scene normalization maps corners and center, inverts exactly") {
  const SceneBounds b = oma_bounds();
  const SceneNormalization norm(b);
  CHECK((norm.normalize(b.lo) - Eigen::Vector3d(-1, -1, -1)).norm() < 1e-12);
  CHECK((norm.normalize(0.5 * (b.lo + b.hi)) - Eigen::Vector3d::Zero()).norm() < 1e-12);
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d p = b.lo + (b.hi - b.lo).cwiseProduct(Eigen::Vector3d(u(rng), u(rng), u(rng)));
    CHECK((norm.denormalize(norm.normalize(p)) - p).cwiseAbs().maxCoeff() < 1e-12);
  }
  SceneBounds degenerate = b;
  degenerate.hi.z() = degenerate.lo.z();
  CHECK_THROWS_AS(SceneNormalization{degenerate}, ValidationError);
}

TEST_CASE("nadir pinhole rays point straight down") {
  PinholeCamera cam = PinholeCamera::look_at({0, 0, 500}, {0, 0, 0}, 400.0, 64, 64);
  const Camera camera{cam};
  const SceneNormalization norm(oma_bounds());
  // The principal pixel: center of the image.
  const Ray ray = ray_for_pixel(camera, 31.5, 31.5, 300.0, 330.0, {}, norm);
  CHECK(ray.direction.x() == doctest::Approx(0.0).scale(1).epsilon(1e-9));
  CHECK(ray.direction.y() == doctest::Approx(0.0).scale(1).epsilon(1e-9));
  CHECK(ray.direction.z() < 0.0);
}

TEST_CASE("distinct pixels give non-parallel perspective rays") {
  PinholeCamera cam = PinholeCamera::look_at({10, -20, 500}, {0, 0, 315}, 400.0, 64, 64);
  const SceneNormalization norm(oma_bounds());
  const Ray a = ray_for_pixel(Camera{cam}, 10, 10, 300.0, 330.0, {}, norm);
  const Ray b = ray_for_pixel(Camera{cam}, 50, 40, 300.0, 330.0, {}, norm);
  CHECK(a.direction.cross(b.direction).norm() > 1e-6);
}

TEST_CASE("ray altitude parameterization spans the full height range") {
  const RpcModel m = randomized_cubic(300);
  const LocalFrame frame{m.lat_off, m.lon_off};
  const SceneNormalization norm(oma_bounds());
  const Ray ray = ray_for_pixel(Camera{m}, 200.0, 200.0, 300.0, 330.0, frame, norm);
  CHECK(ray.altitude_at(ray.t_near) == doctest::Approx(330.0).epsilon(1e-12));
  CHECK(ray.altitude_at(ray.t_far) == doctest::Approx(300.0).epsilon(1e-12));
  CHECK(std::abs(ray.direction.norm() - 1.0) < 1e-9);
}

TEST_CASE("rpc rays reproject to their source pixel along the interval") {
  std::mt19937_64 rng(36);
  std::uniform_real_distribution<double> upix(50.0, 450.0);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  const RpcModel m = randomized_cubic(301);
  const LocalFrame frame{m.lat_off, m.lon_off};
  const SceneNormalization norm(oma_bounds());
  for (int i = 0; i < 25; ++i) {
    const double row = upix(rng), col = upix(rng);
    const Ray ray = ray_for_pixel(Camera{m}, row, col, 300.0, 330.0, frame, norm);
    for (int k = 0; k < 4; ++k) {
      const double t = ray.t_near + ut(rng) * (ray.t_far - ray.t_near);
      const Eigen::Vector3d p = norm.denormalize(ray.point_at(t));
      double lat, lon, alt;
      frame.to_geographic(p, &lat, &lon, &alt);
      const PixelCoord px = rpc_project(m, lat, lon, alt);
      CHECK(std::hypot(px.row - row, px.col - col) < 1e-2);
    }
  }
}

TEST_CASE("direction stays unit under normalization round trip") {
  PinholeCamera cam = PinholeCamera::look_at({25, 5, 480}, {0, 0, 315}, 380.0, 64, 64);
  const SceneNormalization norm(oma_bounds());
  const Ray ray = ray_for_pixel(Camera{cam}, 12, 44, 300.0, 330.0, {}, norm);
  CHECK(std::abs(ray.direction.norm() - 1.0) < 1e-9);
}

TEST_CASE("invalid altitude interval rejected") {
  PinholeCamera cam = PinholeCamera::look_at({0, 0, 500}, {0, 0, 0}, 400.0, 64, 64);
  const SceneNormalization norm(oma_bounds());
  CHECK_THROWS_AS(ray_for_pixel(Camera{cam}, 1, 1, 330.0, 300.0, {}, norm), ValidationError);
}
