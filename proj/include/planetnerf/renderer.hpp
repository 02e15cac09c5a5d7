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

#include "planetnerf/camera.hpp"
#include "planetnerf/encoding.hpp"
#include "planetnerf/field.hpp"
#include "planetnerf/geometry.hpp"
#include "planetnerf/image.hpp"

namespace planetnerf {

enum class SampleMode { kUniform, kStratified };

struct RaySamples {
  Eigen::VectorXd t;       // strictly increasing
  Eigen::VectorXd delta;   // positive; last entry capped at span / n
  Eigen::MatrixXd positions;  // 3 x n, normalized scene coordinates
};

// Uniform: midpoints of n equal bins of [t_near, t_far]. Stratified: one
// uniform draw per bin, deterministic per seed.
RaySamples sample_along_ray(const Ray& ray, int n_samples, SampleMode mode, std::uint64_t seed);

struct RenderedPixel {
  Eigen::Vector3d color = Eigen::Vector3d::Zero();
  double altitude_m = 0.0;
  double opacity = 0.0;       // sum of compositing weights, 1 - T_{N+1}
  double beta = 0.0;          // composited uncertainty + beta_min floor
  double t_mean = 0.0;        // expected ray parameter (mid-ray when empty)
};

// Seasonal color law: c_i = c_m ⊙ c_a ⊙ (s + (1 - s) a_sky).
inline Eigen::Vector3d seasonal_color_law(const Eigen::Vector3d& season,
                                          const Eigen::Vector3d& albedo, double shading,
                                          const Eigen::Vector3d& sky) {
  Eigen::Vector3d c;
  for (int ch = 0; ch < 3; ++ch)
    c[ch] = season[ch] * albedo[ch] * (shading + (1.0 - shading) * sky[ch]);
  return c;
}

// Per-sample values for one ray; column s of the batch matrices.
struct SampleSlice {
  Eigen::Ref<const Eigen::VectorXd> sigma;
  Eigen::Ref<const Eigen::VectorXd> shading;
  Eigen::Ref<const Eigen::VectorXd> beta;
  Eigen::Ref<const Eigen::MatrixXd> albedo;  // 3 x n
  Eigen::Ref<const Eigen::MatrixXd> sky;     // 3 x n
  Eigen::Ref<const Eigen::MatrixXd> season;  // 3 x n
};

// Transmittance-weighted compositing with the seasonal color law
//   c_i = c_m ⊙ c_a ⊙ (s + (1 - s) a_sky).
// Empty rays (opacity below eps) report mid-ray t_mean and opacity as-is so
// evaluators can mask them. altitude_m is left at 0; callers map t_mean
// through the ray's altitude parameterization.
RenderedPixel compose_color(const SampleSlice& samples, const Eigen::VectorXd& deltas,
                            const Eigen::VectorXd& t, double t_near, double t_far,
                            double beta_min, double eps = 1e-6);

// Sensitivities flowing back into the per-sample field outputs from a loss on
// the composited color and uncertainty.
struct ComposeBackward {
  Eigen::VectorXd d_sigma;
  Eigen::MatrixXd d_albedo;
  Eigen::VectorXd d_shading;
  Eigen::MatrixXd d_sky;
  Eigen::VectorXd d_beta;
  Eigen::MatrixXd d_season;
};

ComposeBackward compose_color_backward(const SampleSlice& samples, const Eigen::VectorXd& deltas,
                                       const Eigen::Vector3d& d_color, double d_beta_composite);

// How ray positions become field inputs: raw coordinates for the SN/ME
// variants, frequency expansion otherwise.
struct RenderInputSpec {
  bool use_positional_encoding = true;
  EncodingConfig encoding;

  int input_dim() const {
    return use_positional_encoding ? encoding.output_dim(3) : 3;
  }
  Eigen::MatrixXd transform(const Eigen::MatrixXd& positions) const {
    return use_positional_encoding ? positional_encode_batch(positions, encoding) : positions;
  }
};

struct RenderOptions {
  int n_samples = 64;
  SampleMode mode = SampleMode::kUniform;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
  int width = 0;    // 0: camera native
  int height = 0;
};

struct RenderResult {
  Image color;     // H x W x 3
  Image altitude;  // H x W x 1, meters
  Image opacity;   // H x W x 1
};

RenderResult render_image(const FieldParams& params, const SeasonGate& gate, const Camera& camera,
                          int month_index, const Eigen::Vector3d& d_sun, int image_index,
                          const RenderInputSpec& input_spec, const LocalFrame& frame,
                          const SceneNormalization& norm, const RenderOptions& options);

}  // namespace planetnerf
