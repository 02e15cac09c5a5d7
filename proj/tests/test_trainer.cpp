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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "planetnerf/synthetic.hpp"
#include "planetnerf/trainer.hpp"

using namespace planetnerf;
namespace fs = std::filesystem;

namespace {

// Small seasonal scene shared by the trainer tests: 6 train views across
// distinct months plus one covered test view.
const SyntheticScene& fixture_scene() {
  static const SyntheticScene scene = [] {
    SyntheticSceneSpec spec;
    spec.grid_size = 16;
    spec.extent_m = 48.0;
    spec.month_palette = seasonal_palette();
    spec.snow_months = {12, 1, 2};
    spec.num_views = 7;
    spec.view_months = {1, 4, 7, 10, 12, 7, 7};
    spec.view_days = {15, 15, 15, 15, 15, 5, 25};
    spec.view_hours_utc = {17, 17, 17, 17, 17, 15, 19};
    spec.view_is_test = {false, false, false, false, false, false, true};
    return generate_synthetic_scene(spec, 5);
  }();
  return scene;
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.rays_per_batch = 24;
  cfg.batches_per_epoch = 2;
  cfg.trunk_width = 12;
  cfg.trunk_depth = 2;
  cfg.skip_layer = -1;
  cfg.sun_hidden = 6;
  cfg.uncertainty_hidden = 6;
  cfg.season_hidden = {6};
  cfg.n_samples = 8;
  cfg.num_frequencies = 4;
  cfg.seed = 3;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("pnf_tr_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<RenderedPixel> constant_pixels(int n, const Eigen::Vector3d& color, double beta) {
  std::vector<RenderedPixel> px(n);
  for (auto& p : px) {
    p.color = color;
    p.beta = beta;
  }
  return px;
}

}  // namespace

TEST_CASE("variant mapping") {
  CHECK(variant_from_flags(true, true) == Variant::kPN);
  CHECK(variant_from_flags(true, false) == Variant::kME);
  CHECK(variant_from_flags(false, true) == Variant::kPE);
  CHECK(variant_from_flags(false, false) == Variant::kSN);
  CHECK(variant_from_name("pn") == Variant::kPN);
  CHECK_THROWS_AS(variant_from_name("xx"), ValidationError);
}

TEST_CASE("variant assemblies differ only by the documented parts") {
  TrainConfig cfg = tiny_train_config();
  cfg.use_month_embedding = true;
  cfg.use_positional_encoding = false;
  const FieldConfig me = make_field_config(cfg, 4);
  cfg.use_month_embedding = false;
  const FieldConfig sn = make_field_config(cfg, 4);
  CHECK(me.input_dim == 3);
  CHECK(sn.input_dim == 3);
  cfg.use_positional_encoding = true;
  const FieldConfig pe = make_field_config(cfg, 4);
  CHECK(pe.input_dim == 2 * 3 * cfg.num_frequencies);

  const std::size_t me_count = init_field(me, 1).parameter_count();
  const std::size_t sn_count = init_field(sn, 1).parameter_count();
  // SN = ME minus the season head and the embedding table.
  const FieldParams me_params = init_field(me, 1);
  std::size_t season_params = 12 * me.month_embedding_dim;
  for (const auto& l : me_params.season)
    season_params += static_cast<std::size_t>(l.weight.size()) + l.bias.size();
  season_params += static_cast<std::size_t>(me_params.season_out.weight.size()) +
                   me_params.season_out.bias.size();
  CHECK(sn_count == me_count - season_params);
}

TEST_CASE("perfect prediction leaves only the regularizer") {
  TrainConfig cfg = tiny_train_config();
  Eigen::MatrixXd gt(3, 4);
  gt.setConstant(0.5);
  const auto rendered = constant_pixels(4, {0.5, 0.5, 0.5}, 1.0);
  const LossResult loss = compute_loss(rendered, gt, cfg);
  CHECK(loss.mse == 0.0);
  CHECK(loss.total == doctest::Approx(-std::log(cfg.beta_min)).epsilon(1e-12));
  for (const auto& d : loss.d_color) CHECK(d.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uncertainty loss is stationary at beta squared equals the residual square") {
  TrainConfig cfg = tiny_train_config();
  const double r = 0.21;
  Eigen::MatrixXd gt(3, 1);
  gt.setZero();
  auto loss_at = [&](double beta) {
    return compute_loss(constant_pixels(1, {r, r, r}, beta), gt, cfg).total;
  };
  const double at_r = loss_at(r);
  CHECK(at_r < loss_at(r * 1.05));
  CHECK(at_r < loss_at(r * 0.95));
  // Fine grid argmin lands on beta = r.
  double best_beta = 0.0, best = 1e18;
  for (double beta = 0.05; beta < 1.0; beta += 1e-4) {
    const double v = loss_at(beta);
    if (v < best) {
      best = v;
      best_beta = beta;
    }
  }
  CHECK(std::abs(best_beta - r) < 2e-4);
}

TEST_CASE("frozen uncertainty reduces the loss to the plain quadratic") {
  TrainConfig cfg = tiny_train_config();
  cfg.use_uncertainty = false;
  cfg.lambda_solar = 0.0;
  Eigen::MatrixXd gt(3, 2);
  gt.col(0) = Eigen::Vector3d(0.1, 0.2, 0.3);
  gt.col(1) = Eigen::Vector3d(0.4, 0.5, 0.6);
  std::vector<RenderedPixel> rendered(2);
  rendered[0].color = {0.3, 0.2, 0.1};
  rendered[1].color = {0.9, 0.5, 0.2};
  rendered[0].beta = rendered[1].beta = 123.0;  // must be ignored
  const LossResult loss = compute_loss(rendered, gt, cfg);
  double mse = 0.0;
  for (int r = 0; r < 2; ++r) mse += (rendered[r].color - gt.col(r)).squaredNorm() / 3.0 / 2.0;
  CHECK(loss.total == doctest::Approx(0.5 * mse).epsilon(1e-12));
  CHECK(loss.mse == doctest::Approx(mse).epsilon(1e-12));
}

TEST_CASE("non-finite predictions abort with a training error") {
  TrainConfig cfg = tiny_train_config();
  Eigen::MatrixXd gt(3, 1);
  gt.setZero();
  auto rendered = constant_pixels(1, {0.5, 0.5, 0.5}, 1.0);
  rendered[0].color[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(compute_loss(rendered, gt, cfg), TrainingError);
}

TEST_CASE("adam leaves zero-gradient tensors bit-identical") {
  FieldConfig fc;
  fc.input_dim = 3;
  fc.trunk_width = 4;
  fc.trunk_depth = 2;
  fc.skip_layer = -1;
  fc.sun_hidden = 3;
  fc.uncertainty_hidden = 3;
  fc.season_hidden = {3};
  fc.num_images = 2;
  FieldParams params = init_field(fc, 9);
  const FieldParams before = params;
  FieldGrads grads = zeros_like(params);
  grads.trunk[0].weight(0, 0) = 0.5;  // single nonzero gradient
  AdamOptimizer adam(params);
  adam.step(params, grads, 1e-3);
  CHECK(params.trunk[0].weight(0, 0) != before.trunk[0].weight(0, 0));
  CHECK(params.trunk[0].weight(1, 0) == before.trunk[0].weight(1, 0));
  CHECK((params.month_embedding - before.month_embedding).cwiseAbs().maxCoeff() == 0.0);
  CHECK((params.transient - before.transient).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single step on a one-month batch leaves other embedding rows untouched") {
  const SyntheticScene& scene = fixture_scene();
  TrainConfig cfg = tiny_train_config();
  cfg.activation_epoch = 1;  // gate open from the start
  Trainer trainer(scene.dataset, cfg);
  // Seed the embeddings with nonzero values so updates are visible.
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < trainer.params().month_embedding.cols(); ++c)
      trainer.params().month_embedding(r, c) = 0.01 * (r + 1) + 0.001 * c;
  const Eigen::MatrixXd before = trainer.params().month_embedding;
  // Image 2 is the July train view.
  const int july_image = 2;
  REQUIRE(scene.dataset.images[july_image].month_index == 7);
  auto batch = trainer.batch_from_image(july_image, 16, 99);
  trainer.step(batch, 1);
  const Eigen::MatrixXd& after = trainer.params().month_embedding;
  for (int m = 0; m < 12; ++m) {
    if (m == 6) {
      CHECK((after.row(m) - before.row(m)).cwiseAbs().maxCoeff() > 0.0);
    } else {
      for (int c = 0; c < after.cols(); ++c) CHECK(after(m, c) == before(m, c));
    }
  }
}

TEST_CASE("epochs before activation keep season parameters at initialization") {
  const SyntheticScene& scene = fixture_scene();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 2;
  cfg.activation_epoch = 3;
  TempDir dir("gate");
  Trainer trainer(scene.dataset, cfg);
  const FieldParams init = trainer.params();
  trainer.run(dir.path.string());
  const Checkpoint ep2 =
      load_checkpoint((dir.path / "checkpoint_ep2.ckpt").string());
  CHECK((ep2.params.month_embedding - init.month_embedding).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < init.season.size(); ++i) {
    CHECK((ep2.params.season[i].weight - init.season[i].weight).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ep2.params.season[i].bias - init.season[i].bias).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((ep2.params.season_out.weight - init.season_out.weight).cwiseAbs().maxCoeff() == 0.0);
  // The trunk must have moved.
  CHECK((ep2.params.trunk[0].weight - init.trunk[0].weight).cwiseAbs().maxCoeff() > 0.0);
  CHECK_FALSE(ep2.gate_enabled);
}

TEST_CASE("epoch log has exactly the configured number of records") {
  const SyntheticScene& scene = fixture_scene();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 20;
  cfg.batches_per_epoch = 1;
  cfg.rays_per_batch = 8;
  TempDir dir("epochs");
  Trainer trainer(scene.dataset, cfg);
  const TrainResult result = trainer.run(dir.path.string());
  CHECK(result.log.size() == 20);
  std::ifstream log(dir.path / "metrics.jsonl");
  int lines = 0;
  std::string line;
  while (std::getline(log, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 20);
  CHECK(fs::exists(dir.path / "checkpoint_ep20.ckpt"));
  CHECK(fs::exists(dir.path / "checkpoint.ckpt"));
}

TEST_CASE("training replays identically for the same seed") {
  const SyntheticScene& scene = fixture_scene();
  const TrainConfig cfg = tiny_train_config();
  TempDir a_dir("replay_a"), b_dir("replay_b");
  Trainer a(scene.dataset, cfg);
  Trainer b(scene.dataset, cfg);
  const TrainResult ra = a.run(a_dir.path.string());
  const TrainResult rb = b.run(b_dir.path.string());
  REQUIRE(ra.log.size() == rb.log.size());
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    CHECK(ra.log[i].loss == rb.log[i].loss);
    CHECK(ra.log[i].psnr_train == rb.log[i].psnr_train);
  }
}

TEST_CASE("loss is non-increasing over ten small steps on a frozen batch") {
  const SyntheticScene& scene = fixture_scene();
  TrainConfig cfg = tiny_train_config();
  cfg.learning_rate = 1e-4;
  cfg.lr_decay = 1.0;
  Trainer trainer(scene.dataset, cfg);
  auto batch = trainer.make_batch(1, 0);
  double prev = trainer.loss_only(batch, 1);
  for (int s = 0; s < 10; ++s) {
    trainer.step(batch, 1);
    const double cur = trainer.loss_only(batch, 1);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("report assembly covers every test image and is deterministic") {
  const SyntheticScene& scene = fixture_scene();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 1;
  cfg.batches_per_epoch = 1;
  TempDir dir("report");
  Trainer trainer(scene.dataset, cfg);
  const TrainResult result = trainer.run(dir.path.string());
  const EvalReport a = assemble_report("pn", scene.dataset, result.checkpoint);
  const EvalReport b = assemble_report("pn", scene.dataset, result.checkpoint);
  CHECK(a.per_image.size() == scene.dataset.test_indices().size());
  CHECK(a.mean_psnr_db == b.mean_psnr_db);
  CHECK(a.mean_ssim == b.mean_ssim);
  REQUIRE(a.per_image.size() == b.per_image.size());
  for (std::size_t i = 0; i < a.per_image.size(); ++i) {
    CHECK(a.per_image[i].psnr_db == b.per_image[i].psnr_db);
    CHECK(a.per_image[i].alt_mae_m.has_value() == b.per_image[i].alt_mae_m.has_value());
  }
  // The synthetic bundle ships a DSM, so altitude scores are present.
  CHECK(a.per_image[0].alt_mae_m.has_value());
}

TEST_CASE("report marks altitude absent without a DSM") {
  SyntheticScene scene = fixture_scene();
  SceneDataset no_dsm = scene.dataset;
  no_dsm.gt_altitude.reset();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 1;
  cfg.batches_per_epoch = 1;
  TempDir dir("nodsm");
  Trainer trainer(no_dsm, cfg);
  const TrainResult result = trainer.run(dir.path.string());
  const EvalReport rep = assemble_report("pn", no_dsm, result.checkpoint);
  for (const auto& row : rep.per_image) CHECK_FALSE(row.alt_mae_m.has_value());
  CHECK_FALSE(rep.mean_alt_mae_m.has_value());
}

TEST_CASE("train config file round trip with overrides") {
  TempDir dir("cfg");
  const fs::path cfg_path = dir.path / "train.cfg";
  std::ofstream(cfg_path) << "epochs = 7\n"
                          << "learning_rate = 0.001  # comment\n"
                          << "season_hidden = 8,8\n"
                          << "use_uncertainty = false\n"
                          << "\n# full-line comment\n";
  const TrainConfig cfg = parse_train_config(cfg_path.string());
  CHECK(cfg.epochs == 7);
  CHECK(cfg.learning_rate == doctest::Approx(0.001));
  CHECK(cfg.season_hidden == std::vector<int>{8, 8});
  CHECK_FALSE(cfg.use_uncertainty);
  std::ofstream(cfg_path) << "not_a_key = 3\n";
  CHECK_THROWS_AS(parse_train_config(cfg_path.string()), ParseError);
}

TEST_CASE("invalid train configuration is rejected") {
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = tiny_train_config();
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("checkpoint metadata round trip") {
  const SyntheticScene& scene = fixture_scene();
  const TrainConfig cfg = tiny_train_config();
  const std::string meta = checkpoint_meta_json(cfg, scene.dataset);
  const CheckpointMeta parsed = parse_checkpoint_meta(meta);
  CHECK(parsed.variant == "pn");
  CHECK(parsed.train_config.epochs == cfg.epochs);
  CHECK(parsed.bounds.lo.z() == scene.dataset.bounds.lo.z());
  CHECK(parsed.frame.lat0_deg == scene.dataset.frame.lat0_deg);
}
