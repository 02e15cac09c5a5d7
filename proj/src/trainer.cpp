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

#include "planetnerf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace planetnerf {

using nlohmann::json;

Variant variant_from_flags(bool use_month_embedding, bool use_positional_encoding) {
  if (use_month_embedding && use_positional_encoding) return Variant::kPN;
  if (use_month_embedding) return Variant::kME;
  if (use_positional_encoding) return Variant::kPE;
  return Variant::kSN;
}

Variant variant_from_name(const std::string& name) {
  if (name == "sn") return Variant::kSN;
  if (name == "me") return Variant::kME;
  if (name == "pe") return Variant::kPE;
  if (name == "pn") return Variant::kPN;
  throw ValidationError("unknown variant '" + name + "' (expected sn|me|pe|pn)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kSN: return "sn";
    case Variant::kME: return "me";
    case Variant::kPE: return "pe";
    case Variant::kPN: return "pn";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (activation_epoch < 1) throw ValidationError("activation_epoch must be >= 1");
  if (rays_per_batch < 1) throw ValidationError("rays_per_batch must be >= 1");
  if (learning_rate <= 0.0 || lr_decay <= 0.0)
    throw ValidationError("learning rate and decay must be positive");
  if (beta_min <= 0.0) throw ValidationError("beta_min must be positive");
  if (n_samples < 1) throw ValidationError("n_samples must be >= 1");
  if (num_frequencies < 1) throw ValidationError("num_frequencies must be >= 1");
}

FieldConfig make_field_config(const TrainConfig& cfg, int num_images) {
  FieldConfig f;
  EncodingConfig enc{cfg.num_frequencies, cfg.encode_include_identity};
  f.input_dim = cfg.use_positional_encoding ? enc.output_dim(3) : 3;
  f.trunk_width = cfg.trunk_width;
  f.trunk_depth = cfg.trunk_depth;
  f.skip_layer = cfg.skip_layer;
  f.sun_hidden = cfg.sun_hidden;
  f.uncertainty_hidden = cfg.uncertainty_hidden;
  f.season_hidden = cfg.season_hidden;
  f.month_embedding_dim = cfg.month_embedding_dim;
  f.num_images = num_images;
  f.beta_min = cfg.beta_min;
  f.use_month_embedding = cfg.use_month_embedding;
  f.season_condition_on_h = cfg.season_condition_on_h;
  return f;
}

RenderInputSpec make_input_spec(const TrainConfig& cfg) {
  return RenderInputSpec{cfg.use_positional_encoding,
                         EncodingConfig{cfg.num_frequencies, cfg.encode_include_identity}};
}

LossResult compute_loss(const std::vector<RenderedPixel>& rendered,
                        const Eigen::MatrixXd& gt_colors, const TrainConfig& cfg) {
  const int R = static_cast<int>(rendered.size());
  if (R == 0) throw ValidationError("compute_loss: empty batch");
  if (gt_colors.cols() != R) throw ValidationError("compute_loss: gt shape mismatch");
  LossResult out;
  out.d_color.resize(R);
  out.d_beta.assign(R, 0.0);
  const double inv_r = 1.0 / R;
  for (int r = 0; r < R; ++r) {
    const Eigen::Vector3d residual = rendered[r].color - gt_colors.col(r);
    const double mse_r = residual.squaredNorm() / 3.0;
    out.mse += mse_r * inv_r;
    if (cfg.use_uncertainty) {
      const double beta = rendered[r].beta;
      out.total += (mse_r / (2.0 * beta * beta) +
                    cfg.uncertainty_reg_scale * (std::log(beta) - std::log(cfg.beta_min))) *
                   inv_r;
      out.d_color[r] = residual / (3.0 * beta * beta) * inv_r;
      out.d_beta[r] =
          (-mse_r / (beta * beta * beta) + cfg.uncertainty_reg_scale / beta) * inv_r;
    } else {
      out.total += 0.5 * mse_r * inv_r;
      out.d_color[r] = residual / 3.0 * inv_r;
    }
  }
  if (!std::isfinite(out.total)) throw TrainingError("non-finite loss on batch");
  return out;
}

AdamOptimizer::AdamOptimizer(const FieldParams& like, double beta1, double beta2, double eps)
    : m_(zeros_like(like)), v_(zeros_like(like)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

namespace {

std::vector<std::pair<double*, Eigen::Index>> tensor_spans(FieldParams& p) {
  std::vector<std::pair<double*, Eigen::Index>> out;
  p.for_each_tensor([&](const std::string&, auto& t) { out.push_back({t.data(), t.size()}); });
  return out;
}

}  // namespace

void AdamOptimizer::step(FieldParams& params, const FieldGrads& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto ps = tensor_spans(params);
  auto gs = tensor_spans(const_cast<FieldGrads&>(grads));
  auto ms = tensor_spans(m_);
  auto vs = tensor_spans(v_);
  if (ps.size() != gs.size()) throw ValidationError("optimizer: gradient layout mismatch");
  for (std::size_t k = 0; k < ps.size(); ++k) {
    double* p = ps[k].first;
    const double* g = gs[k].first;
    double* m = ms[k].first;
    double* v = vs[k].first;
    const Eigen::Index n = ps[k].second;
    for (Eigen::Index i = 0; i < n; ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
    }
  }
}

// --- trainer ----------------------------------------------------------------

Trainer::Trainer(const SceneDataset& dataset, const TrainConfig& config)
    : dataset_(dataset),
      config_(config),
      norm_(dataset.bounds),
      input_spec_(make_input_spec(config)),
      params_(init_field(make_field_config(config, static_cast<int>(dataset.images.size())),
                         config.seed)),
      adam_(params_),
      batch_rng_(seeded_rng(config.seed, "batches")),
      train_images_(dataset.train_indices()) {
  config_.validate();
  if (train_images_.empty()) throw ValidationError("dataset has no train images");
  std::size_t acc = 0;
  for (int idx : train_images_) {
    acc += static_cast<std::size_t>(dataset_.images[idx].pixels.height()) *
           dataset_.images[idx].pixels.width();
    pixel_cumsum_.push_back(acc);
  }
}

SeasonGate Trainer::gate_for_epoch(int epoch) const {
  SeasonGate gate;
  gate.activation_epoch = config_.activation_epoch;
  gate.enabled = config_.use_month_embedding && epoch >= config_.activation_epoch;
  return gate;
}

double Trainer::learning_rate_for_epoch(int epoch) const {
  return config_.learning_rate * std::pow(config_.lr_decay, epoch - 1);
}

int Trainer::batches_per_epoch() const {
  if (config_.batches_per_epoch > 0) return config_.batches_per_epoch;
  const std::size_t total = pixel_cumsum_.back();
  return static_cast<int>((total + config_.rays_per_batch - 1) / config_.rays_per_batch);
}

Trainer::Batch Trainer::batch_from_pixels(
    const std::vector<std::pair<int, std::pair<int, int>>>& picks) {
  const int R = static_cast<int>(picks.size());
  const int ns = config_.n_samples;
  Batch batch;
  batch.rays.reserve(R);
  batch.deltas.reserve(R);
  batch.ts.reserve(R);
  batch.gt_colors.resize(3, R);
  Eigen::MatrixXd positions(3, static_cast<Eigen::Index>(R) * ns);
  batch.inputs.d_sun.resize(3, static_cast<Eigen::Index>(R) * ns);
  batch.inputs.month.resize(static_cast<std::size_t>(R) * ns);
  batch.inputs.image.resize(static_cast<std::size_t>(R) * ns);

  for (int r = 0; r < R; ++r) {
    const int img_idx = picks[r].first;
    const auto [row, col] = picks[r].second;
    const ImageRecord& rec = dataset_.images[img_idx];
    Ray ray = ray_for_pixel(rec.camera, row, col, dataset_.bounds.alt_min(),
                            dataset_.bounds.alt_max(), dataset_.frame, norm_);
    RaySamples smp =
        sample_along_ray(ray, ns, config_.sample_mode, mix_seed(config_.seed, ray_counter_++));
    positions.middleCols(static_cast<Eigen::Index>(r) * ns, ns) = smp.positions;
    for (int i = 0; i < ns; ++i) {
      batch.inputs.d_sun.col(static_cast<Eigen::Index>(r) * ns + i) = rec.sun_dir_enu;
      batch.inputs.month[static_cast<std::size_t>(r) * ns + i] = rec.month_index;
      batch.inputs.image[static_cast<std::size_t>(r) * ns + i] = img_idx;
    }
    for (int ch = 0; ch < 3; ++ch) batch.gt_colors(ch, r) = rec.pixels.at(row, col, ch);
    batch.rays.push_back(std::move(ray));
    batch.deltas.push_back(std::move(smp.delta));
    batch.ts.push_back(std::move(smp.t));
  }
  batch.inputs.x_enc = input_spec_.transform(positions);
  return batch;
}

Trainer::Batch Trainer::make_batch(int epoch, int batch_index) {
  (void)epoch;
  (void)batch_index;
  std::vector<std::pair<int, std::pair<int, int>>> picks;
  picks.reserve(config_.rays_per_batch);
  if (config_.per_image_batching) {
    std::uniform_int_distribution<int> pick_image(0, static_cast<int>(train_images_.size()) - 1);
    const int img_idx = train_images_[pick_image(batch_rng_)];
    const ImageRecord& rec = dataset_.images[img_idx];
    std::uniform_int_distribution<int> pick_row(0, rec.pixels.height() - 1);
    std::uniform_int_distribution<int> pick_col(0, rec.pixels.width() - 1);
    for (int r = 0; r < config_.rays_per_batch; ++r)
      picks.push_back({img_idx, {pick_row(batch_rng_), pick_col(batch_rng_)}});
  } else {
    std::uniform_int_distribution<std::size_t> pick_flat(0, pixel_cumsum_.back() - 1);
    for (int r = 0; r < config_.rays_per_batch; ++r) {
      const std::size_t flat = pick_flat(batch_rng_);
      std::size_t k = 0;
      while (pixel_cumsum_[k] <= flat) ++k;
      const std::size_t local = flat - (k == 0 ? 0 : pixel_cumsum_[k - 1]);
      const int img_idx = train_images_[k];
      const int width = dataset_.images[img_idx].pixels.width();
      picks.push_back({img_idx,
                       {static_cast<int>(local / width), static_cast<int>(local % width)}});
    }
  }
  return batch_from_pixels(picks);
}

Trainer::Batch Trainer::batch_from_image(int image_index, int n_rays, std::uint64_t salt) {
  if (image_index < 0 || image_index >= static_cast<int>(dataset_.images.size()))
    throw IndexError("image index out of range");
  auto rng = seeded_rng(config_.seed ^ salt, "image_batch");
  const ImageRecord& rec = dataset_.images[image_index];
  std::uniform_int_distribution<int> pick_row(0, rec.pixels.height() - 1);
  std::uniform_int_distribution<int> pick_col(0, rec.pixels.width() - 1);
  std::vector<std::pair<int, std::pair<int, int>>> picks;
  for (int r = 0; r < n_rays; ++r)
    picks.push_back({image_index, {pick_row(rng), pick_col(rng)}});
  return batch_from_pixels(picks);
}

namespace {

struct RayComposites {
  std::vector<RenderedPixel> pixels;
  std::vector<SampleSlice> slices;
};

RayComposites compose_batch(const FieldOutputs& out, const Trainer::Batch& batch, int ns,
                            double beta_min) {
  const int R = static_cast<int>(batch.rays.size());
  RayComposites rc;
  rc.pixels.reserve(R);
  rc.slices.reserve(R);
  for (int r = 0; r < R; ++r) {
    const int off = r * ns;
    SampleSlice slice{out.sigma.segment(off, ns),     out.shading.segment(off, ns),
                      out.beta.segment(off, ns),      out.albedo.middleCols(off, ns),
                      out.sky.middleCols(off, ns),    out.season.middleCols(off, ns)};
    RenderedPixel px = compose_color(slice, batch.deltas[r], batch.ts[r], batch.rays[r].t_near,
                                     batch.rays[r].t_far, beta_min);
    px.altitude_m = batch.rays[r].altitude_at(px.t_mean);
    rc.pixels.push_back(px);
    rc.slices.push_back(slice);
  }
  return rc;
}

}  // namespace

double Trainer::loss_only(const Batch& batch, int epoch) {
  const FieldActivations acts = field_forward(params_, batch.inputs, gate_for_epoch(epoch));
  const RayComposites rc =
      compose_batch(acts.outputs, batch, config_.n_samples, config_.beta_min);
  return compute_loss(rc.pixels, batch.gt_colors, config_).total;
}

Trainer::StepResult Trainer::step(const Batch& batch, int epoch) {
  const int ns = config_.n_samples;
  const int R = static_cast<int>(batch.rays.size());
  const SeasonGate gate = gate_for_epoch(epoch);
  const FieldActivations acts = field_forward(params_, batch.inputs, gate);
  const RayComposites rc = compose_batch(acts.outputs, batch, ns, config_.beta_min);
  const LossResult loss = compute_loss(rc.pixels, batch.gt_colors, config_);

  OutputSensitivities sens;
  const Eigen::Index S = static_cast<Eigen::Index>(R) * ns;
  sens.d_sigma.setZero(S);
  sens.d_albedo.setZero(3, S);
  sens.d_shading.setZero(S);
  sens.d_sky.setZero(3, S);
  sens.d_beta.setZero(S);
  sens.d_season.setZero(3, S);

  for (int r = 0; r < R; ++r) {
    const ComposeBackward cb =
        compose_color_backward(rc.slices[r], batch.deltas[r], loss.d_color[r], loss.d_beta[r]);
    const int off = r * ns;
    sens.d_sigma.segment(off, ns) = cb.d_sigma;
    sens.d_albedo.middleCols(off, ns) = cb.d_albedo;
    sens.d_shading.segment(off, ns) = cb.d_shading;
    sens.d_sky.middleCols(off, ns) = cb.d_sky;
    sens.d_beta.segment(off, ns) = cb.d_beta;
    sens.d_season.middleCols(off, ns) = cb.d_season;
    if (config_.lambda_solar > 0.0) {
      // Shading should follow the (detached) transmittance profile, and the
      // visible surface should be lit: d/ds of
      //   lambda [ mean_i (s_i - T_i)^2 + (1 - sum_i w_i s_i) ].
      double transmittance = 1.0;
      for (int i = 0; i < ns; ++i) {
        const double a = rc.slices[r].sigma[i] * batch.deltas[r][i];
        const double alpha = 1.0 - std::exp(-a);
        const double w = transmittance * alpha;
        sens.d_shading[off + i] +=
            config_.lambda_solar *
            (2.0 * (rc.slices[r].shading[i] - transmittance) / ns - w) / R;
        transmittance *= std::exp(-a);
      }
    }
  }

  const BackwardResult back = field_gradients(params_, acts, sens);
  adam_.step(params_, back.grads, learning_rate_for_epoch(epoch));
  return StepResult{loss.total, loss.mse};
}

TrainResult Trainer::run(const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string meta = checkpoint_meta_json(config_, dataset_);
  const std::string log_path = (fs::path(out_dir) / "metrics.jsonl").string();
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw ValidationError("cannot open metrics log: " + log_path);

  auto checkpoint_for = [&](int epoch) {
    Checkpoint ckpt;
    ckpt.params = params_;
    ckpt.epoch = epoch;
    ckpt.gate_enabled = gate_for_epoch(std::max(epoch, 1)).enabled;
    ckpt.meta_json = meta;
    return ckpt;
  };
  save_checkpoint((fs::path(out_dir) / "checkpoint_ep0.ckpt").string(), checkpoint_for(0));

  TrainResult result;
  const int batches = batches_per_epoch();
  for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    double mse_sum = 0.0;
    for (int b = 0; b < batches; ++b) {
      Batch batch = make_batch(epoch, b);
      try {
        const StepResult r = step(batch, epoch);
        loss_sum += r.loss;
        mse_sum += r.mse;
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(b) + "); last good checkpoint: " +
                            (fs::path(out_dir) / ("checkpoint_ep" + std::to_string(epoch - 1) +
                                                  ".ckpt"))
                                .string());
      }
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / batches;
    rec.psnr_train = mse_sum > 0.0 ? 10.0 * std::log10(1.0 / (mse_sum / batches)) : kPsnrCap;
    rec.wall_seconds = wall;
    result.log.push_back(rec);
    json line = {{"epoch", rec.epoch},
                 {"loss", rec.loss},
                 {"psnr_train", rec.psnr_train},
                 {"wall_seconds", rec.wall_seconds}};
    log << line.dump() << "\n";
    log.flush();
    save_checkpoint((fs::path(out_dir) / ("checkpoint_ep" + std::to_string(epoch) + ".ckpt"))
                        .string(),
                    checkpoint_for(epoch));
  }
  result.checkpoint = checkpoint_for(config_.epochs);
  result.checkpoint_path = (fs::path(out_dir) / "checkpoint.ckpt").string();
  save_checkpoint(result.checkpoint_path, result.checkpoint);
  return result;
}

// --- config files and checkpoint metadata -----------------------------------

namespace {

json train_config_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"rays_per_batch", c.rays_per_batch},
          {"batches_per_epoch", c.batches_per_epoch},
          {"learning_rate", c.learning_rate},
          {"lr_decay", c.lr_decay},
          {"activation_epoch", c.activation_epoch},
          {"beta_min", c.beta_min},
          {"lambda_solar", c.lambda_solar},
          {"uncertainty_reg_scale", c.uncertainty_reg_scale},
          {"use_uncertainty", c.use_uncertainty},
          {"seed", c.seed},
          {"use_month_embedding", c.use_month_embedding},
          {"use_positional_encoding", c.use_positional_encoding},
          {"per_image_batching", c.per_image_batching},
          {"n_samples", c.n_samples},
          {"sample_mode", c.sample_mode == SampleMode::kUniform ? "uniform" : "stratified"},
          {"trunk_width", c.trunk_width},
          {"trunk_depth", c.trunk_depth},
          {"skip_layer", c.skip_layer},
          {"sun_hidden", c.sun_hidden},
          {"uncertainty_hidden", c.uncertainty_hidden},
          {"season_hidden", c.season_hidden},
          {"month_embedding_dim", c.month_embedding_dim},
          {"season_condition_on_h", c.season_condition_on_h},
          {"num_frequencies", c.num_frequencies},
          {"encode_include_identity", c.encode_include_identity}};
}

TrainConfig train_config_from(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs");
  c.rays_per_batch = j.at("rays_per_batch");
  c.batches_per_epoch = j.at("batches_per_epoch");
  c.learning_rate = j.at("learning_rate");
  c.lr_decay = j.at("lr_decay");
  c.activation_epoch = j.at("activation_epoch");
  c.beta_min = j.at("beta_min");
  c.lambda_solar = j.at("lambda_solar");
  c.uncertainty_reg_scale = j.at("uncertainty_reg_scale");
  c.use_uncertainty = j.at("use_uncertainty");
  c.seed = j.at("seed");
  c.use_month_embedding = j.at("use_month_embedding");
  c.use_positional_encoding = j.at("use_positional_encoding");
  c.per_image_batching = j.at("per_image_batching");
  c.n_samples = j.at("n_samples");
  c.sample_mode =
      j.at("sample_mode") == "uniform" ? SampleMode::kUniform : SampleMode::kStratified;
  c.trunk_width = j.at("trunk_width");
  c.trunk_depth = j.at("trunk_depth");
  c.skip_layer = j.at("skip_layer");
  c.sun_hidden = j.at("sun_hidden");
  c.uncertainty_hidden = j.at("uncertainty_hidden");
  c.season_hidden = j.at("season_hidden").get<std::vector<int>>();
  c.month_embedding_dim = j.at("month_embedding_dim");
  c.season_condition_on_h = j.at("season_condition_on_h");
  c.num_frequencies = j.at("num_frequencies");
  c.encode_include_identity = j.at("encode_include_identity");
  return c;
}

}  // namespace

std::string train_config_to_json(const TrainConfig& c) { return train_config_json(c).dump(); }

TrainConfig train_config_from_json(const std::string& json_text) {
  return train_config_from(json::parse(json_text));
}

TrainConfig parse_train_config(const std::string& path, TrainConfig base) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, "-", "cannot open config file");
  json j = train_config_json(base);
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw ParseError(path, "line " + std::to_string(line_no), "expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\n");
      const auto b = s.find_last_not_of(" \t\r\n");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!j.contains(key)) throw ParseError(path, key, "unknown config key");
    if (j[key].is_string()) {
      j[key] = value;
    } else if (j[key].is_boolean()) {
      if (value == "true" || value == "1")
        j[key] = true;
      else if (value == "false" || value == "0")
        j[key] = false;
      else
        throw ParseError(path, key, "expected boolean");
    } else if (j[key].is_array()) {
      std::vector<int> items;
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) items.push_back(std::stoi(tok));
      j[key] = items;
    } else if (j[key].is_number_integer() || j[key].is_number_unsigned()) {
      j[key] = std::stoll(value);
    } else {
      j[key] = std::stod(value);
    }
  }
  return train_config_from(j);
}

std::string checkpoint_meta_json(const TrainConfig& cfg, const SceneDataset& dataset) {
  json j;
  j["variant"] = variant_name(cfg.variant());
  j["train_config"] = train_config_json(cfg);
  j["frame"] = {{"latitude_deg", dataset.frame.lat0_deg},
                {"longitude_deg", dataset.frame.lon0_deg}};
  j["bounds"] = {{"east_min_m", dataset.bounds.lo.x()},  {"east_max_m", dataset.bounds.hi.x()},
                 {"north_min_m", dataset.bounds.lo.y()}, {"north_max_m", dataset.bounds.hi.y()},
                 {"alt_min_m", dataset.bounds.lo.z()},   {"alt_max_m", dataset.bounds.hi.z()}};
  return j.dump();
}

CheckpointMeta parse_checkpoint_meta(const std::string& meta_json) {
  json j = json::parse(meta_json);
  CheckpointMeta meta;
  meta.variant = j.at("variant");
  meta.train_config = train_config_from(j.at("train_config"));
  meta.frame.lat0_deg = j.at("frame").at("latitude_deg");
  meta.frame.lon0_deg = j.at("frame").at("longitude_deg");
  const auto& b = j.at("bounds");
  meta.bounds.lo = Eigen::Vector3d(b.at("east_min_m"), b.at("north_min_m"), b.at("alt_min_m"));
  meta.bounds.hi = Eigen::Vector3d(b.at("east_max_m"), b.at("north_max_m"), b.at("alt_max_m"));
  return meta;
}

// --- evaluation --------------------------------------------------------------

EvalReport assemble_report(const std::string& variant_label, const SceneDataset& dataset,
                           const Checkpoint& checkpoint, const EvalOptions& options) {
  const CheckpointMeta meta = parse_checkpoint_meta(checkpoint.meta_json);
  if ((meta.bounds.lo - dataset.bounds.lo).cwiseAbs().maxCoeff() > 1e-6 ||
      (meta.bounds.hi - dataset.bounds.hi).cwiseAbs().maxCoeff() > 1e-6)
    throw ValidationError("checkpoint scene bounds disagree with the dataset");
  const SceneNormalization norm(dataset.bounds);
  const RenderInputSpec input_spec = make_input_spec(meta.train_config);
  const SeasonGate gate{checkpoint.gate_enabled, meta.train_config.activation_epoch};

  EvalReport report;
  report.variant = variant_label;
  double psnr_acc = 0.0, ssim_acc = 0.0, mae_acc = 0.0;
  int mae_count = 0;
  const auto test_idx = dataset.test_indices();
  if (test_idx.empty()) throw ValidationError("dataset has no test images");
  for (int idx : test_idx) {
    const ImageRecord& rec = dataset.images[idx];
    RenderOptions ropt;
    ropt.n_samples = meta.train_config.n_samples;
    ropt.mode = SampleMode::kUniform;
    ropt.threads = options.threads;
    const int image_index = idx < checkpoint.params.config.num_images ? idx : 0;
    const RenderResult rendered =
        render_image(checkpoint.params, gate, rec.camera, rec.month_index, rec.sun_dir_enu,
                     image_index, input_spec, dataset.frame, norm, ropt);

    ImageScore score;
    score.id = rec.id;
    score.month = rec.month_index;
    score.psnr_db = psnr(rendered.color, rec.pixels, 1.0);
    score.ssim = ssim(rendered.color, rec.pixels);

    if (dataset.gt_altitude) {
      const int h = rendered.altitude.height(), w = rendered.altitude.width();
      Image gt(h, w, 1), mask(h, w, 1, 0.0);
      std::size_t cells = 0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          if (rendered.opacity.at(r, c) < options.opacity_threshold) continue;
          const Ray ray = ray_for_pixel(rec.camera, r, c, dataset.bounds.alt_min(),
                                        dataset.bounds.alt_max(), dataset.frame, norm);
          const double t = (rendered.altitude.at(r, c) - ray.alt0_m) / ray.alt_slope_m;
          const Eigen::Vector3d p = norm.denormalize(ray.point_at(t));
          const auto sample = dataset.gt_altitude->sample(p.x(), p.y());
          if (!sample) continue;
          gt.at(r, c) = *sample;
          mask.at(r, c) = 1.0;
          ++cells;
        }
      }
      score.masked_cells = cells;
      if (cells > 0) {
        score.alt_mae_m = altitude_mae(rendered.altitude, gt, mask, options.bias_removal);
        mae_acc += *score.alt_mae_m;
        ++mae_count;
      }
    }
    psnr_acc += score.psnr_db;
    ssim_acc += score.ssim;
    report.per_image.push_back(std::move(score));
  }
  const double n = static_cast<double>(report.per_image.size());
  report.mean_psnr_db = psnr_acc / n;
  report.mean_ssim = ssim_acc / n;
  if (mae_count > 0) report.mean_alt_mae_m = mae_acc / mae_count;
  return report;
}

}  // namespace planetnerf
