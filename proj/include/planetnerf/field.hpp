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

// Network dimensions and activations. Head widths mirror the inherited
// defaults (512-wide, 8-layer trunk with one skip connection); everything is
// configurable so desk-scale tests can shrink the instance.
struct FieldConfig {
  int input_dim = 60;   // encoded x size (3 when the encoding is bypassed)
  int trunk_width = 512;
  int trunk_depth = 8;
  int skip_layer = 4;   // layer whose input re-concatenates the encoded x; -1 disables
  int sun_hidden = 128;
  int uncertainty_hidden = 128;
  std::vector<int> season_hidden = {64, 64};
  int month_embedding_dim = 4;  // K
  int transient_dim = 4;
  int num_images = 1;
  double beta_min = 0.05;
  bool use_month_embedding = true;
  bool season_condition_on_h = true;  // false: season head sees e_m only

  void validate() const;
};

// While disabled, the seasonal color is the multiplicative identity and no
// gradient reaches the season head or the embedding table.
struct SeasonGate {
  bool enabled = true;
  int activation_epoch = 3;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct FieldParams {
  FieldConfig config;
  std::vector<DenseLayer> trunk;
  DenseLayer density;   // width -> 1, softplus
  DenseLayer albedo;    // width -> 3, sigmoid
  DenseLayer sun_hidden;  // [width + 3] -> sun_hidden, relu
  DenseLayer sun_out;     // -> 1, sigmoid
  DenseLayer sky;         // 3 -> 3, sigmoid (sun direction only)
  DenseLayer uncertainty_hidden;  // [width + transient_dim] -> hidden, relu
  DenseLayer uncertainty_out;     // -> 1, softplus + beta_min
  std::vector<DenseLayer> season;  // [width + K] (or K) -> hidden, relu
  DenseLayer season_out;           // -> 3, 2*sigmoid
  Eigen::MatrixXd month_embedding;  // 12 x K, zero-initialized
  Eigen::MatrixXd transient;        // num_images x transient_dim

  // Visits every parameter tensor in a stable order under stable names.
  template <typename Fn>
  void for_each_tensor(Fn&& fn);
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const;

  std::size_t parameter_count() const;
};

// Gradients share the parameter layout.
using FieldGrads = FieldParams;

FieldParams init_field(const FieldConfig& config, std::uint64_t seed);
FieldGrads zeros_like(const FieldParams& params);

struct FieldInputs {
  Eigen::MatrixXd x_enc;   // input_dim x S
  Eigen::MatrixXd d_sun;   // 3 x S
  std::vector<int> month;  // 1..12 per sample
  std::vector<int> image;  // 0-based row of the transient table

  int samples() const { return static_cast<int>(x_enc.cols()); }
};

struct FieldOutputs {
  Eigen::VectorXd sigma;    // nonnegative density
  Eigen::MatrixXd albedo;   // 3 x S, (0,1)
  Eigen::VectorXd shading;  // (0,1)
  Eigen::MatrixXd sky;      // 3 x S, (0,1)
  Eigen::VectorXd beta;     // >= beta_min
  Eigen::MatrixXd season;   // 3 x S, (0,2); exactly 1 while gated off
};

// Intermediate activations retained for the backward pass.
struct FieldActivations {
  FieldInputs inputs;
  bool gate_enabled = true;
  std::vector<Eigen::MatrixXd> trunk_post;
  Eigen::MatrixXd sun_hidden_post;
  Eigen::MatrixXd uncertainty_hidden_post;
  std::vector<Eigen::MatrixXd> season_hidden_post;
  Eigen::MatrixXd embedding_batch;  // K x S gather of e_m
  Eigen::MatrixXd transient_batch;  // transient_dim x S gather of t_j
  Eigen::VectorXd sigma_pre;
  Eigen::VectorXd beta_pre;
  FieldOutputs outputs;
};

FieldActivations field_forward(const FieldParams& params, FieldInputs inputs,
                               const SeasonGate& gate);

// Upstream sensitivities, one entry per forward output.
struct OutputSensitivities {
  Eigen::VectorXd d_sigma;
  Eigen::MatrixXd d_albedo;
  Eigen::VectorXd d_shading;
  Eigen::MatrixXd d_sky;
  Eigen::VectorXd d_beta;
  Eigen::MatrixXd d_season;
};

struct BackwardResult {
  FieldGrads grads;
  Eigen::MatrixXd d_x_enc;  // input_dim x S
  Eigen::MatrixXd d_d_sun;  // 3 x S
};

// Exact reverse-mode gradients of the loss seeded by `upstream` with respect
// to every parameter (embedding rows included) and to the inputs.
BackwardResult field_gradients(const FieldParams& params, const FieldActivations& acts,
                               const OutputSensitivities& upstream);

// Convenience single-sample forward for tests and probes.
struct FieldSample {
  double sigma = 0.0;
  Eigen::Vector3d albedo = Eigen::Vector3d::Zero();
  double shading = 0.0;
  Eigen::Vector3d sky = Eigen::Vector3d::Zero();
  double beta = 0.0;
  Eigen::Vector3d season = Eigen::Vector3d::Ones();
};
FieldSample field_forward_one(const FieldParams& params, const Eigen::VectorXd& x_enc,
                              const Eigen::Vector3d& d_sun, int image_index, int month_index,
                              const SeasonGate& gate);

// --- checkpoint container -------------------------------------------------
//
// Versioned, self-describing, byte-stable: magic, little-endian u32 version,
// u64 JSON header length, JSON header (config echo, caller metadata, tensor
// directory), then raw float64 tensor payload in directory order.

struct Checkpoint {
  FieldParams params;
  int epoch = 0;
  bool gate_enabled = false;
  std::string meta_json;  // caller payload (train config echo etc.)
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// --- template bodies --------------------------------------------------------

template <typename Fn>
void FieldParams::for_each_tensor(Fn&& fn) {
  auto layer = [&](const std::string& name, DenseLayer& l) {
    fn(name + ".weight", l.weight);
    fn(name + ".bias", l.bias);
  };
  for (std::size_t i = 0; i < trunk.size(); ++i) layer("trunk" + std::to_string(i), trunk[i]);
  layer("density", density);
  layer("albedo", albedo);
  layer("sun_hidden", sun_hidden);
  layer("sun_out", sun_out);
  layer("sky", sky);
  layer("uncertainty_hidden", uncertainty_hidden);
  layer("uncertainty_out", uncertainty_out);
  for (std::size_t i = 0; i < season.size(); ++i) layer("season" + std::to_string(i), season[i]);
  if (config.use_month_embedding) {
    layer("season_out", season_out);
    fn("month_embedding", month_embedding);
  }
  fn("transient", transient);
}

template <typename Fn>
void FieldParams::for_each_tensor(Fn&& fn) const {
  const_cast<FieldParams*>(this)->for_each_tensor(
      [&](const std::string& name, auto& tensor) { fn(name, std::as_const(tensor)); });
}

}  // namespace planetnerf
