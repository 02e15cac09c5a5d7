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

#include <string>
#include <vector>

#include "planetnerf/dataset.hpp"
#include "planetnerf/field.hpp"
#include "planetnerf/metrics.hpp"
#include "planetnerf/renderer.hpp"

namespace planetnerf {

// Ablation matrix: month embedding x positional encoding.
enum class Variant { kSN, kME, kPE, kPN };

Variant variant_from_flags(bool use_month_embedding, bool use_positional_encoding);
Variant variant_from_name(const std::string& name);  // "sn" | "me" | "pe" | "pn"
const char* variant_name(Variant v);

struct TrainConfig {
  int epochs = 20;
  int rays_per_batch = 1024;
  int batches_per_epoch = 0;  // 0: one full pass over all train pixels
  double learning_rate = 5e-4;
  double lr_decay = 0.95;  // per-epoch exponential factor
  int activation_epoch = 3;
  double beta_min = 0.05;
  double lambda_solar = 0.0;          // shading/transmittance consistency weight
  double uncertainty_reg_scale = 1.0;  // 1: stationary at beta'^2 = r^2
  bool use_uncertainty = true;         // false: beta' frozen at 1, no regularizer
  std::uint64_t seed = 0;
  bool use_month_embedding = true;
  bool use_positional_encoding = true;
  bool per_image_batching = false;
  int n_samples = 64;
  SampleMode sample_mode = SampleMode::kStratified;
  // network dimensions
  int trunk_width = 512;
  int trunk_depth = 8;
  int skip_layer = 4;
  int sun_hidden = 128;
  int uncertainty_hidden = 128;
  std::vector<int> season_hidden = {64, 64};
  int month_embedding_dim = 4;
  bool season_condition_on_h = true;
  int num_frequencies = 10;
  bool encode_include_identity = false;

  void validate() const;
  Variant variant() const {
    return variant_from_flags(use_month_embedding, use_positional_encoding);
  }
};

// Flat key = value file, '#' comments; keys are the TrainConfig field names.
TrainConfig parse_train_config(const std::string& path, TrainConfig base = {});
std::string train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const std::string& json_text);

// The model assembly for a flag pair: the SN/ME variants feed raw
// coordinates, PE/PN the frequency expansion; ME/PN carry the season head.
FieldConfig make_field_config(const TrainConfig& cfg, int num_images);
RenderInputSpec make_input_spec(const TrainConfig& cfg);

// Per-ray negative log-likelihood with predicted uncertainty:
//   mean_ch (C - gt)^2 / (2 beta'^2) + w (log beta' - log beta_min),
// averaged over rays. With use_uncertainty off this degenerates to the plain
// quadratic mean_ch (C - gt)^2 / 2.
struct LossResult {
  double total = 0.0;
  double mse = 0.0;  // mean over rays and channels, for PSNR bookkeeping
  std::vector<Eigen::Vector3d> d_color;  // per ray
  std::vector<double> d_beta;            // per ray
};

LossResult compute_loss(const std::vector<RenderedPixel>& rendered,
                        const Eigen::MatrixXd& gt_colors /* 3 x R */, const TrainConfig& cfg);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const FieldParams& like, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);
  // Zero-gradient tensors with zero state are left bit-identical.
  void step(FieldParams& params, const FieldGrads& grads, double lr);
  long steps_taken() const { return t_; }

 private:
  FieldGrads m_, v_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double psnr_train = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> log;
  std::string checkpoint_path;  // final checkpoint file
};

class Trainer {
 public:
  Trainer(const SceneDataset& dataset, const TrainConfig& config);

  // Full run; per-epoch checkpoints and a JSONL metrics log under out_dir.
  TrainResult run(const std::string& out_dir);

  // A batch of rays with ground-truth colors, ready for one step.
  struct Batch {
    std::vector<Ray> rays;
    std::vector<Eigen::VectorXd> deltas;  // per ray
    std::vector<Eigen::VectorXd> ts;
    FieldInputs inputs;
    Eigen::MatrixXd gt_colors;  // 3 x R
  };

  Batch make_batch(int epoch, int batch_index);
  // Rays drawn from a single train image (month-isolation tests).
  Batch batch_from_image(int image_index, int n_rays, std::uint64_t salt);

  struct StepResult {
    double loss = 0.0;
    double mse = 0.0;
  };
  // One forward/backward/update.
  StepResult step(const Batch& batch, int epoch);
  double loss_only(const Batch& batch, int epoch);

  SeasonGate gate_for_epoch(int epoch) const;
  double learning_rate_for_epoch(int epoch) const;
  const FieldParams& params() const { return params_; }
  FieldParams& params() { return params_; }
  const TrainConfig& config() const { return config_; }
  int batches_per_epoch() const;

 private:
  Batch batch_from_pixels(const std::vector<std::pair<int, std::pair<int, int>>>& picks);

  const SceneDataset& dataset_;
  TrainConfig config_;
  SceneNormalization norm_;
  RenderInputSpec input_spec_;
  FieldParams params_;
  AdamOptimizer adam_;
  std::mt19937_64 batch_rng_;
  std::vector<int> train_images_;
  std::vector<std::size_t> pixel_cumsum_;  // over train images
  std::uint64_t ray_counter_ = 0;
};

std::string checkpoint_meta_json(const TrainConfig& cfg, const SceneDataset& dataset);

struct CheckpointMeta {
  TrainConfig train_config;
  LocalFrame frame;
  SceneBounds bounds;
  std::string variant;
};
CheckpointMeta parse_checkpoint_meta(const std::string& meta_json);

// Renders every test image with its own month and sun direction and scores
// PSNR / SSIM / altitude MAE against the bundle's ground truth.
struct EvalOptions {
  bool bias_removal = false;
  double opacity_threshold = 0.5;
  int threads = 0;
};
EvalReport assemble_report(const std::string& variant_label, const SceneDataset& dataset,
                           const Checkpoint& checkpoint, const EvalOptions& options = {});

}  // namespace planetnerf
