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

#include "planetnerf/field.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace planetnerf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

MatrixXd sigmoid(const MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

VectorXd softplus(const VectorXd& z) {
  VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    out[i] = z[i] > 30.0 ? z[i] : std::log1p(std::exp(z[i]));
  return out;
}

VectorXd softplus_grad(const VectorXd& z) {
  VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-z[i]));
  return out;
}

DenseLayer init_layer(const std::string& name, int out_dim, int in_dim, std::uint64_t seed) {
  DenseLayer l;
  l.weight.resize(out_dim, in_dim);
  l.bias = VectorXd::Zero(out_dim);
  auto rng = seeded_rng(seed, name);
  const double bound = std::sqrt(6.0 / in_dim);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (int c = 0; c < in_dim; ++c)
    for (int r = 0; r < out_dim; ++r) l.weight(r, c) = dist(rng);
  return l;
}

int trunk_layer_input(const FieldConfig& c, int layer) {
  if (layer == 0) return c.input_dim;
  if (layer == c.skip_layer) return c.trunk_width + c.input_dim;
  return c.trunk_width;
}

}  // namespace

void FieldConfig::validate() const {
  if (input_dim < 1 || trunk_width < 1 || trunk_depth < 1)
    throw ValidationError("field dimensions must be positive");
  if (skip_layer >= trunk_depth)
    throw ValidationError("skip layer index beyond trunk depth");
  if (skip_layer == 0) throw ValidationError("skip at layer 0 is the plain input layer");
  if (sun_hidden < 1 || uncertainty_hidden < 1)
    throw ValidationError("head widths must be positive");
  for (int w : season_hidden)
    if (w < 1) throw ValidationError("season hidden widths must be positive");
  if (season_hidden.empty()) throw ValidationError("season head needs at least one hidden layer");
  if (month_embedding_dim < 1) throw ValidationError("embedding dimension must be positive");
  if (transient_dim < 1 || num_images < 1)
    throw ValidationError("transient table dimensions must be positive");
  if (beta_min <= 0.0) throw ValidationError("beta_min must be positive");
}

FieldParams init_field(const FieldConfig& config, std::uint64_t seed) {
  config.validate();
  FieldParams p;
  p.config = config;
  const int w = config.trunk_width;
  for (int i = 0; i < config.trunk_depth; ++i)
    p.trunk.push_back(
        init_layer("trunk" + std::to_string(i), w, trunk_layer_input(config, i), seed));
  p.density = init_layer("density", 1, w, seed);
  p.albedo = init_layer("albedo", 3, w, seed);
  p.sun_hidden = init_layer("sun_hidden", config.sun_hidden, w + 3, seed);
  p.sun_out = init_layer("sun_out", 1, config.sun_hidden, seed);
  p.sky = init_layer("sky", 3, 3, seed);
  p.uncertainty_hidden =
      init_layer("uncertainty_hidden", config.uncertainty_hidden, w + config.transient_dim, seed);
  p.uncertainty_out = init_layer("uncertainty_out", 1, config.uncertainty_hidden, seed);
  if (config.use_month_embedding) {
    int in = config.season_condition_on_h ? w + config.month_embedding_dim
                                          : config.month_embedding_dim;
    for (std::size_t i = 0; i < config.season_hidden.size(); ++i) {
      p.season.push_back(init_layer("season" + std::to_string(i), config.season_hidden[i], in, seed));
      in = config.season_hidden[i];
    }
    p.season_out = init_layer("season_out", 3, in, seed);
    p.month_embedding = MatrixXd::Zero(12, config.month_embedding_dim);
  }
  {
    p.transient.resize(config.num_images, config.transient_dim);
    auto rng = seeded_rng(seed, "transient");
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (int c = 0; c < config.transient_dim; ++c)
      for (int r = 0; r < config.num_images; ++r) p.transient(r, c) = dist(rng);
  }
  return p;
}

FieldGrads zeros_like(const FieldParams& params) {
  FieldGrads g = params;
  g.for_each_tensor([](const std::string&, auto& t) { t.setZero(); });
  return g;
}

std::size_t FieldParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

FieldActivations field_forward(const FieldParams& params, FieldInputs inputs,
                               const SeasonGate& gate) {
  const FieldConfig& cfg = params.config;
  const int S = inputs.samples();
  if (inputs.x_enc.rows() != cfg.input_dim)
    throw ValidationError("encoded input dimension mismatch: got " +
                          std::to_string(inputs.x_enc.rows()) + ", expected " +
                          std::to_string(cfg.input_dim));
  if (inputs.d_sun.cols() != S || static_cast<int>(inputs.month.size()) != S ||
      static_cast<int>(inputs.image.size()) != S)
    throw ValidationError("field input batch size mismatch");
  for (int m : inputs.month)
    if (m < 1 || m > 12) throw IndexError("month index out of range: " + std::to_string(m));
  for (int j : inputs.image)
    if (j < 0 || j >= cfg.num_images)
      throw IndexError("image index out of range: " + std::to_string(j));

  FieldActivations acts;
  acts.gate_enabled = gate.enabled && cfg.use_month_embedding;
  acts.trunk_post.reserve(params.trunk.size());

  const MatrixXd* cur = &inputs.x_enc;
  for (int i = 0; i < cfg.trunk_depth; ++i) {
    const DenseLayer& l = params.trunk[i];
    MatrixXd z;
    if (i == cfg.skip_layer) {
      const int w = cfg.trunk_width;
      z = l.weight.leftCols(w) * (*cur) + l.weight.rightCols(cfg.input_dim) * inputs.x_enc;
    } else {
      z = l.weight * (*cur);
    }
    z.colwise() += l.bias;
    acts.trunk_post.push_back(relu(z));
    cur = &acts.trunk_post.back();
  }
  const MatrixXd& h = *cur;

  FieldOutputs& out = acts.outputs;
  acts.sigma_pre = (params.density.weight * h).transpose().col(0) +
                   VectorXd::Constant(S, params.density.bias[0]);
  out.sigma = softplus(acts.sigma_pre);

  MatrixXd albedo_z = params.albedo.weight * h;
  albedo_z.colwise() += params.albedo.bias;
  out.albedo = sigmoid(albedo_z);

  {
    const int w = cfg.trunk_width;
    MatrixXd z = params.sun_hidden.weight.leftCols(w) * h +
                 params.sun_hidden.weight.rightCols(3) * inputs.d_sun;
    z.colwise() += params.sun_hidden.bias;
    acts.sun_hidden_post = relu(z);
    MatrixXd s_z = params.sun_out.weight * acts.sun_hidden_post;
    s_z.colwise() += params.sun_out.bias;
    out.shading = sigmoid(s_z).transpose().col(0);
  }

  {
    MatrixXd z = params.sky.weight * inputs.d_sun;
    z.colwise() += params.sky.bias;
    out.sky = sigmoid(z);
  }

  {
    acts.transient_batch.resize(cfg.transient_dim, S);
    for (int s = 0; s < S; ++s)
      acts.transient_batch.col(s) = params.transient.row(inputs.image[s]).transpose();
    const int w = cfg.trunk_width;
    MatrixXd z = params.uncertainty_hidden.weight.leftCols(w) * h +
                 params.uncertainty_hidden.weight.rightCols(cfg.transient_dim) *
                     acts.transient_batch;
    z.colwise() += params.uncertainty_hidden.bias;
    acts.uncertainty_hidden_post = relu(z);
    acts.beta_pre = (params.uncertainty_out.weight * acts.uncertainty_hidden_post).transpose().col(0) +
                    VectorXd::Constant(S, params.uncertainty_out.bias[0]);
    out.beta = softplus(acts.beta_pre).array() + cfg.beta_min;
  }

  if (acts.gate_enabled) {
    const int k = cfg.month_embedding_dim;
    acts.embedding_batch.resize(k, S);
    for (int s = 0; s < S; ++s)
      acts.embedding_batch.col(s) = params.month_embedding.row(inputs.month[s] - 1).transpose();
    MatrixXd z;
    if (cfg.season_condition_on_h) {
      const int w = cfg.trunk_width;
      z = params.season[0].weight.leftCols(w) * h +
          params.season[0].weight.rightCols(k) * acts.embedding_batch;
    } else {
      z = params.season[0].weight * acts.embedding_batch;
    }
    z.colwise() += params.season[0].bias;
    acts.season_hidden_post.push_back(relu(z));
    for (std::size_t i = 1; i < params.season.size(); ++i) {
      MatrixXd zz = params.season[i].weight * acts.season_hidden_post.back();
      zz.colwise() += params.season[i].bias;
      acts.season_hidden_post.push_back(relu(zz));
    }
    MatrixXd zo = params.season_out.weight * acts.season_hidden_post.back();
    zo.colwise() += params.season_out.bias;
    out.season = 2.0 * sigmoid(zo);
  } else {
    out.season = MatrixXd::Ones(3, S);
  }

  acts.inputs = std::move(inputs);
  return acts;
}

FieldSample field_forward_one(const FieldParams& params, const Eigen::VectorXd& x_enc,
                              const Eigen::Vector3d& d_sun, int image_index, int month_index,
                              const SeasonGate& gate) {
  FieldInputs in;
  in.x_enc = x_enc;
  in.d_sun = d_sun;
  in.month = {month_index};
  in.image = {image_index};
  const FieldActivations acts = field_forward(params, std::move(in), gate);
  FieldSample s;
  s.sigma = acts.outputs.sigma[0];
  s.albedo = acts.outputs.albedo.col(0);
  s.shading = acts.outputs.shading[0];
  s.sky = acts.outputs.sky.col(0);
  s.beta = acts.outputs.beta[0];
  s.season = acts.outputs.season.col(0);
  return s;
}

BackwardResult field_gradients(const FieldParams& params, const FieldActivations& acts,
                               const OutputSensitivities& upstream) {
  const FieldConfig& cfg = params.config;
  const int S = acts.inputs.x_enc.cols();
  const int w = cfg.trunk_width;
  const MatrixXd& h = acts.trunk_post.back();

  BackwardResult res;
  res.grads = zeros_like(params);
  res.d_x_enc = MatrixXd::Zero(cfg.input_dim, S);
  res.d_d_sun = MatrixXd::Zero(3, S);
  MatrixXd dh = MatrixXd::Zero(w, S);

  // density head
  {
    VectorXd dz = upstream.d_sigma.cwiseProduct(softplus_grad(acts.sigma_pre));
    res.grads.density.weight += dz.transpose() * h.transpose();
    res.grads.density.bias[0] += dz.sum();
    dh.noalias() += params.density.weight.transpose() * dz.transpose();
  }

  // albedo head
  {
    const MatrixXd& y = acts.outputs.albedo;
    MatrixXd dz = upstream.d_albedo.cwiseProduct(y.cwiseProduct(MatrixXd::Ones(3, S) - y));
    res.grads.albedo.weight += dz * h.transpose();
    res.grads.albedo.bias += dz.rowwise().sum();
    dh.noalias() += params.albedo.weight.transpose() * dz;
  }

  // sun head
  {
    const VectorXd& y = acts.outputs.shading;
    VectorXd dz_out = upstream.d_shading.cwiseProduct(y.cwiseProduct(VectorXd::Ones(S) - y));
    res.grads.sun_out.weight += dz_out.transpose() * acts.sun_hidden_post.transpose();
    res.grads.sun_out.bias[0] += dz_out.sum();
    MatrixXd d_hidden = params.sun_out.weight.transpose() * dz_out.transpose();
    MatrixXd mask = (acts.sun_hidden_post.array() > 0.0).cast<double>();
    MatrixXd dz = d_hidden.cwiseProduct(mask);
    res.grads.sun_hidden.weight.leftCols(w) += dz * h.transpose();
    res.grads.sun_hidden.weight.rightCols(3) += dz * acts.inputs.d_sun.transpose();
    res.grads.sun_hidden.bias += dz.rowwise().sum();
    dh.noalias() += params.sun_hidden.weight.leftCols(w).transpose() * dz;
    res.d_d_sun.noalias() += params.sun_hidden.weight.rightCols(3).transpose() * dz;
  }

  // sky head
  {
    const MatrixXd& y = acts.outputs.sky;
    MatrixXd dz = upstream.d_sky.cwiseProduct(y.cwiseProduct(MatrixXd::Ones(3, S) - y));
    res.grads.sky.weight += dz * acts.inputs.d_sun.transpose();
    res.grads.sky.bias += dz.rowwise().sum();
    res.d_d_sun.noalias() += params.sky.weight.transpose() * dz;
  }

  // uncertainty head
  {
    VectorXd dz_out = upstream.d_beta.cwiseProduct(softplus_grad(acts.beta_pre));
    res.grads.uncertainty_out.weight +=
        dz_out.transpose() * acts.uncertainty_hidden_post.transpose();
    res.grads.uncertainty_out.bias[0] += dz_out.sum();
    MatrixXd d_hidden = params.uncertainty_out.weight.transpose() * dz_out.transpose();
    MatrixXd mask = (acts.uncertainty_hidden_post.array() > 0.0).cast<double>();
    MatrixXd dz = d_hidden.cwiseProduct(mask);
    res.grads.uncertainty_hidden.weight.leftCols(w) += dz * h.transpose();
    res.grads.uncertainty_hidden.weight.rightCols(cfg.transient_dim) +=
        dz * acts.transient_batch.transpose();
    res.grads.uncertainty_hidden.bias += dz.rowwise().sum();
    dh.noalias() += params.uncertainty_hidden.weight.leftCols(w).transpose() * dz;
    MatrixXd d_t = params.uncertainty_hidden.weight.rightCols(cfg.transient_dim).transpose() * dz;
    for (int s = 0; s < S; ++s)
      res.grads.transient.row(acts.inputs.image[s]) += d_t.col(s).transpose();
  }

  // season head; inert while gated off
  if (acts.gate_enabled) {
    const int k = cfg.month_embedding_dim;
    const MatrixXd& y = acts.outputs.season;
    // y = 2*sigmoid(z)  =>  dy/dz = y (1 - y/2)
    MatrixXd dz = upstream.d_season.cwiseProduct(
        y.cwiseProduct(MatrixXd::Ones(3, S) - 0.5 * y));
    res.grads.season_out.weight += dz * acts.season_hidden_post.back().transpose();
    res.grads.season_out.bias += dz.rowwise().sum();
    MatrixXd d_cur = params.season_out.weight.transpose() * dz;
    for (int i = static_cast<int>(params.season.size()) - 1; i >= 1; --i) {
      MatrixXd mask = (acts.season_hidden_post[i].array() > 0.0).cast<double>();
      MatrixXd dzi = d_cur.cwiseProduct(mask);
      res.grads.season[i].weight += dzi * acts.season_hidden_post[i - 1].transpose();
      res.grads.season[i].bias += dzi.rowwise().sum();
      d_cur = params.season[i].weight.transpose() * dzi;
    }
    MatrixXd mask0 = (acts.season_hidden_post[0].array() > 0.0).cast<double>();
    MatrixXd dz0 = d_cur.cwiseProduct(mask0);
    MatrixXd d_e;
    if (cfg.season_condition_on_h) {
      res.grads.season[0].weight.leftCols(w) += dz0 * h.transpose();
      res.grads.season[0].weight.rightCols(k) += dz0 * acts.embedding_batch.transpose();
      dh.noalias() += params.season[0].weight.leftCols(w).transpose() * dz0;
      d_e = params.season[0].weight.rightCols(k).transpose() * dz0;
    } else {
      res.grads.season[0].weight += dz0 * acts.embedding_batch.transpose();
      d_e = params.season[0].weight.transpose() * dz0;
    }
    res.grads.season[0].bias += dz0.rowwise().sum();
    for (int s = 0; s < S; ++s)
      res.grads.month_embedding.row(acts.inputs.month[s] - 1) += d_e.col(s).transpose();
  }

  // trunk backward
  MatrixXd d_cur = std::move(dh);
  for (int i = cfg.trunk_depth - 1; i >= 0; --i) {
    MatrixXd mask = (acts.trunk_post[i].array() > 0.0).cast<double>();
    MatrixXd dz = d_cur.cwiseProduct(mask);
    const MatrixXd& layer_in =
        i == 0 ? acts.inputs.x_enc : acts.trunk_post[static_cast<std::size_t>(i) - 1];
    if (i == cfg.skip_layer) {
      res.grads.trunk[i].weight.leftCols(w) += dz * layer_in.transpose();
      res.grads.trunk[i].weight.rightCols(cfg.input_dim) += dz * acts.inputs.x_enc.transpose();
      res.grads.trunk[i].bias += dz.rowwise().sum();
      res.d_x_enc.noalias() += params.trunk[i].weight.rightCols(cfg.input_dim).transpose() * dz;
      d_cur = params.trunk[i].weight.leftCols(w).transpose() * dz;
    } else {
      res.grads.trunk[i].weight += dz * layer_in.transpose();
      res.grads.trunk[i].bias += dz.rowwise().sum();
      if (i == 0) {
        res.d_x_enc.noalias() += params.trunk[i].weight.transpose() * dz;
      } else {
        d_cur = params.trunk[i].weight.transpose() * dz;
      }
    }
  }
  return res;
}

// --- checkpoint -------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'N', 'F', 'C', 'K', 'P', 'T', '\n'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json config_to_json(const FieldConfig& c) {
  return {{"input_dim", c.input_dim},
          {"trunk_width", c.trunk_width},
          {"trunk_depth", c.trunk_depth},
          {"skip_layer", c.skip_layer},
          {"sun_hidden", c.sun_hidden},
          {"uncertainty_hidden", c.uncertainty_hidden},
          {"season_hidden", c.season_hidden},
          {"month_embedding_dim", c.month_embedding_dim},
          {"transient_dim", c.transient_dim},
          {"num_images", c.num_images},
          {"beta_min", c.beta_min},
          {"use_month_embedding", c.use_month_embedding},
          {"season_condition_on_h", c.season_condition_on_h}};
}

FieldConfig config_from_json(const nlohmann::json& j) {
  FieldConfig c;
  c.input_dim = j.at("input_dim");
  c.trunk_width = j.at("trunk_width");
  c.trunk_depth = j.at("trunk_depth");
  c.skip_layer = j.at("skip_layer");
  c.sun_hidden = j.at("sun_hidden");
  c.uncertainty_hidden = j.at("uncertainty_hidden");
  c.season_hidden = j.at("season_hidden").get<std::vector<int>>();
  c.month_embedding_dim = j.at("month_embedding_dim");
  c.transient_dim = j.at("transient_dim");
  c.num_images = j.at("num_images");
  c.beta_min = j.at("beta_min");
  c.use_month_embedding = j.at("use_month_embedding");
  c.season_condition_on_h = j.at("season_condition_on_h");
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["config"] = config_to_json(ckpt.params.config);
  header["epoch"] = ckpt.epoch;
  header["gate_enabled"] = ckpt.gate_enabled;
  header["meta"] = ckpt.meta_json;
  nlohmann::json tensors = nlohmann::json::array();
  ckpt.params.for_each_tensor([&](const std::string& name, const auto& t) {
    tensors.push_back({{"name", name},
                       {"rows", static_cast<int>(t.rows())},
                       {"cols", static_cast<int>(t.cols())}});
  });
  header["tensors"] = tensors;
  const std::string hs = header.dump();

  // Atomic write: temp file in the same directory, then rename.
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot open checkpoint for writing: " + path);
    f.write(kMagic, sizeof(kMagic));
    std::uint32_t version = kVersion;
    f.write(reinterpret_cast<const char*>(&version), sizeof(version));
    std::uint64_t len = hs.size();
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    ckpt.params.for_each_tensor([&](const std::string&, const auto& t) {
      f.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(sizeof(double) * t.size()));
    });
    if (!f) throw ValidationError("short write on checkpoint: " + path);
  }
  std::filesystem::rename(tmp, target);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError(path, "magic", "not a checkpoint file");
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion)
    throw ParseError(path, "version", "unsupported version " + std::to_string(version));
  std::uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string hs(len, '\0');
  f.read(hs.data(), static_cast<std::streamsize>(len));
  if (!f) throw ParseError(path, "header", "truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path, "header", e.what());
  }

  Checkpoint ckpt;
  ckpt.params = init_field(config_from_json(header.at("config")), 0);
  ckpt.epoch = header.at("epoch");
  ckpt.gate_enabled = header.at("gate_enabled");
  ckpt.meta_json = header.at("meta");
  std::size_t idx = 0;
  const auto& tensors = header.at("tensors");
  ckpt.params.for_each_tensor([&](const std::string& name, auto& t) {
    if (idx >= tensors.size()) throw ParseError(path, "tensors", "tensor directory too short");
    const auto& entry = tensors[idx++];
    if (entry.at("name") != name || entry.at("rows") != static_cast<int>(t.rows()) ||
        entry.at("cols") != static_cast<int>(t.cols()))
      throw ParseError(path, "tensors", "tensor directory mismatch at " + name);
    f.read(reinterpret_cast<char*>(t.data()),
           static_cast<std::streamsize>(sizeof(double) * t.size()));
  });
  if (!f) throw ParseError(path, "payload", "truncated tensor payload");
  return ckpt;
}

}  // namespace planetnerf
