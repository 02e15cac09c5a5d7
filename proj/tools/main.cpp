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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "planetnerf/dataset.hpp"
#include "planetnerf/metrics.hpp"
#include "planetnerf/renderer.hpp"
#include "planetnerf/solar.hpp"
#include "planetnerf/synthetic.hpp"
#include "planetnerf/trainer.hpp"

namespace fs = std::filesystem;
using namespace planetnerf;
using nlohmann::json;

namespace {

int env_threads() {
  if (const char* v = std::getenv("PLANETNERF_THREADS")) return std::atoi(v);
  return 0;
}

std::string env_out_dir() {
  if (const char* v = std::getenv("PLANETNERF_OUTPUT_DIR")) return v;
  return "";
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

std::array<Eigen::Vector3d, 12> palette_from_name(const std::string& name) {
  if (name == "seasonal") return seasonal_palette();
  if (name == "equinox") return equinox_palette();
  if (name.rfind("flat:", 0) == 0) {
    const auto rgb = parse_int_list(name.substr(5));
    if (rgb.size() != 3) throw ValidationError("flat palette needs r,g,b in 0..255");
    return flat_palette(Eigen::Vector3d(rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0));
  }
  throw ValidationError("unknown palette '" + name + "' (seasonal|equinox|flat:r,g,b)");
}

std::string require_out_dir(std::string out) {
  if (out.empty()) out = env_out_dir();
  if (out.empty()) throw ValidationError("no output directory (--out or PLANETNERF_OUTPUT_DIR)");
  fs::create_directories(out);
  return out;
}

void write_render(const RenderResult& r, const std::string& stem) {
  write_image(stem + "_rgb.png", r.color, PixelFormat::kU8);
  write_image(stem + "_alt.tif", r.altitude, PixelFormat::kF32);
  write_image(stem + "_opacity.tif", r.opacity, PixelFormat::kF32);
}

int find_image(const SceneDataset& ds, const std::string& id) {
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    if (ds.images[i].id == id) return static_cast<int>(i);
  throw ValidationError("image id not found in dataset: " + id);
}

int default_camera_image(const SceneDataset& ds) {
  const auto test = ds.test_indices();
  return test.empty() ? 0 : test.front();
}

struct LoadedCheckpoint {
  Checkpoint ckpt;
  CheckpointMeta meta;
};

LoadedCheckpoint load_ckpt(const std::string& path) {
  LoadedCheckpoint lc{load_checkpoint(path), {}};
  lc.meta = parse_checkpoint_meta(lc.ckpt.meta_json);
  return lc;
}

// ---- synth ----

struct SynthArgs {
  std::string out;
  int views = 12;
  int grid = 64;
  std::uint64_t seed = 7;
  std::string palette = "seasonal";
  std::string snow = "12,1,2";
  std::string camera = "pinhole";
  std::string test_months;  // appends one test view per listed month
  double extent = 64.0;
  double texture = 0.3;
  double alt_min = 0.0, alt_max = 30.0;
  double lat = 41.26, lon = -95.93;
  int year = 2019;
};

int run_synth(const SynthArgs& a) {
  SyntheticSceneSpec spec;
  spec.grid_size = a.grid;
  spec.height_field_seed = a.seed;
  spec.month_palette = palette_from_name(a.palette);
  for (int m : parse_int_list(a.snow)) spec.snow_months.insert(m);
  spec.camera_kind = a.camera == "rpc" ? CameraKind::kRpc : CameraKind::kPinhole;
  spec.extent_m = a.extent;
  spec.texture_amplitude = a.texture;
  spec.alt_min_m = a.alt_min;
  spec.alt_max_m = a.alt_max;
  spec.latitude_deg = a.lat;
  spec.longitude_deg = a.lon;
  spec.year = a.year;
  spec.num_views = a.views;
  for (int v = 0; v < a.views; ++v) {
    spec.view_months.push_back((v % 12) + 1);
    spec.view_days.push_back(15);
    spec.view_hours_utc.push_back(std::vector<double>{17, 15, 19, 13, 11}[(v / 12) % 5]);
    spec.view_is_test.push_back(false);
  }
  if (!a.test_months.empty()) {
    for (int m : parse_int_list(a.test_months)) {
      spec.view_months.push_back(m);
      spec.view_days.push_back(15);
      spec.view_hours_utc.push_back(17.0);
      spec.view_is_test.push_back(true);
      ++spec.num_views;
    }
  }
  const std::string out = require_out_dir(a.out);
  SyntheticScene scene = generate_synthetic_scene(spec, a.seed);
  save_dataset(scene.dataset, out);
  write_oracle_manifest((fs::path(out) / "oracle_manifest.json").string(), spec, a.seed);
  std::cout << "wrote " << scene.dataset.images.size() << " views to " << out << "\n";
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string data;
  std::string out;
  std::string variant = "pn";
  std::string config_file;
  TrainConfig cfg;
  int downsample = 1;
};

int run_train(TrainArgs& a, const std::vector<std::string>& overridden) {
  TrainConfig cfg = a.config_file.empty() ? TrainConfig{} : parse_train_config(a.config_file);
  // Flags override the config file only when the user set them.
  auto was_set = [&](const std::string& flag) {
    return std::find(overridden.begin(), overridden.end(), flag) != overridden.end();
  };
  if (was_set("--epochs")) cfg.epochs = a.cfg.epochs;
  if (was_set("--seed")) cfg.seed = a.cfg.seed;
  if (was_set("--rays-per-batch")) cfg.rays_per_batch = a.cfg.rays_per_batch;
  if (was_set("--batches-per-epoch")) cfg.batches_per_epoch = a.cfg.batches_per_epoch;
  if (was_set("--lr")) cfg.learning_rate = a.cfg.learning_rate;
  if (was_set("--lr-decay")) cfg.lr_decay = a.cfg.lr_decay;
  if (was_set("--activation-epoch")) cfg.activation_epoch = a.cfg.activation_epoch;
  if (was_set("--beta-min")) cfg.beta_min = a.cfg.beta_min;
  if (was_set("--lambda-s")) cfg.lambda_solar = a.cfg.lambda_solar;
  if (was_set("--width")) cfg.trunk_width = a.cfg.trunk_width;
  if (was_set("--depth")) cfg.trunk_depth = a.cfg.trunk_depth;
  if (was_set("--skip-layer")) cfg.skip_layer = a.cfg.skip_layer;
  if (was_set("--ns")) cfg.n_samples = a.cfg.n_samples;
  if (was_set("--sun-hidden")) cfg.sun_hidden = a.cfg.sun_hidden;
  if (was_set("--uncertainty-hidden")) cfg.uncertainty_hidden = a.cfg.uncertainty_hidden;

  const Variant v = variant_from_name(a.variant);
  cfg.use_month_embedding = v == Variant::kME || v == Variant::kPN;
  cfg.use_positional_encoding = v == Variant::kPE || v == Variant::kPN;
  cfg.validate();

  const std::string out = require_out_dir(a.out);
  SceneDataset ds = load_dataset(a.data, a.downsample);
  Trainer trainer(ds, cfg);
  const TrainResult result = trainer.run(out);
  std::cout << "trained " << cfg.epochs << " epochs (" << a.variant
            << "); final loss " << result.log.back().loss << ", train PSNR "
            << result.log.back().psnr_train << " dB\ncheckpoint: " << result.checkpoint_path
            << "\n";
  return 0;
}

// ---- render ----

struct RenderArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string image_id;
  int month = 0;
  std::string sun_date;
  bool sun_from_metadata = false;
  int size = 0;
  std::uint64_t seed = 0;
};

int run_render(const RenderArgs& a) {
  const LoadedCheckpoint lc = load_ckpt(a.checkpoint);
  if (a.month < 1 || a.month > 12)
    throw ValidationError("--month must be in 1..12, got " + std::to_string(a.month));
  SceneDataset ds = load_dataset(a.data, 1);
  const int img = a.image_id.empty() ? default_camera_image(ds) : find_image(ds, a.image_id);
  const ImageRecord& rec = ds.images[img];

  Eigen::Vector3d d_sun;
  std::string sun_label;
  if (a.sun_from_metadata) {
    d_sun = rec.sun_dir_enu;
    sun_label = "meta";
  } else if (!a.sun_date.empty()) {
    const DateTimeUtc t = parse_iso8601_utc(a.sun_date);
    d_sun = sun_direction({t, lc.meta.frame.lat0_deg, lc.meta.frame.lon0_deg});
    char buf[24];
    std::snprintf(buf, sizeof(buf), "d%02d%02dh%02d", t.month, t.day, t.hour);
    sun_label = buf;
  } else {
    throw ValidationError("either --sun-date or --sun-from-metadata is required");
  }

  const SceneNormalization norm(lc.meta.bounds);
  RenderOptions opt;
  opt.n_samples = lc.meta.train_config.n_samples;
  opt.threads = env_threads();
  opt.seed = a.seed;
  if (a.size > 0) opt.width = opt.height = a.size;
  const SeasonGate gate{lc.ckpt.gate_enabled, lc.meta.train_config.activation_epoch};
  const int image_index = img < lc.ckpt.params.config.num_images ? img : 0;
  const RenderResult r =
      render_image(lc.ckpt.params, gate, rec.camera, a.month, d_sun, image_index,
                   make_input_spec(lc.meta.train_config), lc.meta.frame, norm, opt);
  const std::string out = require_out_dir(a.out);
  char stem[64];
  std::snprintf(stem, sizeof(stem), "%s_m%02d_%s", rec.id.c_str(), a.month, sun_label.c_str());
  write_render(r, (fs::path(out) / stem).string());
  std::cout << "rendered " << stem << " into " << out << "\n";
  return 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string months = "3,9";
  std::string days = "1,15,30";
  double hour = 17.0;
  int year = 2019;
  std::string image_id;
  std::uint64_t seed = 0;
};

int run_sweep(const SweepArgs& a) {
  const LoadedCheckpoint lc = load_ckpt(a.checkpoint);
  SceneDataset ds = load_dataset(a.data, 1);
  const int img = a.image_id.empty() ? default_camera_image(ds) : find_image(ds, a.image_id);
  const ImageRecord& rec = ds.images[img];
  const SceneNormalization norm(lc.meta.bounds);
  const std::string out = require_out_dir(a.out);

  RenderOptions opt;
  opt.n_samples = lc.meta.train_config.n_samples;
  opt.threads = env_threads();
  opt.seed = a.seed;
  const SeasonGate gate{lc.ckpt.gate_enabled, lc.meta.train_config.activation_epoch};
  const int image_index = img < lc.ckpt.params.config.num_images ? img : 0;
  const RenderInputSpec spec = make_input_spec(lc.meta.train_config);

  struct Entry {
    int month, day;
    SunSample sun;
    std::string file;
    Image color;
  };
  std::vector<Entry> entries;
  for (int month : parse_int_list(a.months)) {
    const auto sweep = sun_sweep(a.year, month, parse_int_list(a.days), a.hour,
                                 lc.meta.frame.lat0_deg, lc.meta.frame.lon0_deg);
    for (std::size_t d = 0; d < sweep.size(); ++d) {
      const RenderResult res = render_image(lc.ckpt.params, gate, rec.camera, month,
                                            sweep[d].enu, image_index, spec, lc.meta.frame,
                                            norm, opt);
      char stem[64];
      std::snprintf(stem, sizeof(stem), "%s_m%02d_d%02d", rec.id.c_str(), month,
                    parse_int_list(a.days)[d]);
      write_render(res, (fs::path(out) / stem).string());
      entries.push_back(
          {month, parse_int_list(a.days)[d], sweep[d], std::string(stem) + "_rgb.png",
           res.color});
    }
  }

  json manifest;
  manifest["renders"] = json::array();
  for (const Entry& e : entries)
    manifest["renders"].push_back({{"month", e.month},
                                   {"day", e.day},
                                   {"file", e.file},
                                   {"azimuth_deg", e.sun.azimuth_deg},
                                   {"elevation_deg", e.sun.elevation_deg},
                                   {"enu", {e.sun.enu.x(), e.sun.enu.y(), e.sun.enu.z()}}});
  json matrix = json::array();
  for (const Entry& a_e : entries) {
    json row = json::array();
    for (const Entry& b_e : entries) row.push_back(psnr(a_e.color, b_e.color, 1.0));
    matrix.push_back(row);
  }
  manifest["psnr_matrix"] = matrix;
  std::ofstream((fs::path(out) / "sweep_manifest.json")) << manifest.dump(2) << "\n";
  std::cout << "rendered " << entries.size() << " sweep images into " << out << "\n";
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string checkpoints;  // comma-separated
  std::string labels;
  std::string data;
  std::string out;
  bool bias_removal = false;
  int downsample = 1;
};

int run_eval(const EvalArgs& a) {
  SceneDataset ds = load_dataset(a.data, a.downsample);
  std::vector<std::string> paths;
  {
    std::stringstream ss(a.checkpoints);
    std::string tok;
    while (std::getline(ss, tok, ',')) paths.push_back(tok);
  }
  std::vector<std::string> labels;
  if (!a.labels.empty()) {
    std::stringstream ss(a.labels);
    std::string tok;
    while (std::getline(ss, tok, ',')) labels.push_back(tok);
    if (labels.size() != paths.size())
      throw ValidationError("--labels count must match --checkpoints count");
  }
  const std::string out = require_out_dir(a.out);
  EvalOptions opt;
  opt.bias_removal = a.bias_removal;
  opt.threads = env_threads();
  std::vector<EvalReport> reports;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const LoadedCheckpoint lc = load_ckpt(paths[i]);
    const std::string label = i < labels.size() ? labels[i] : lc.meta.variant;
    EvalReport rep = assemble_report(label, ds, lc.ckpt, opt);
    std::ofstream((fs::path(out) / ("report_" + label + ".json"))) << report_to_json(rep) << "\n";
    reports.push_back(std::move(rep));
  }
  const std::string table = reports_to_table(reports);
  std::ofstream((fs::path(out) / "report_table.txt")) << table;
  std::cout << table;
  return 0;
}

// ---- sun-sweep ----

struct SunSweepArgs {
  std::string months = "3,9";
  std::string days = "1,15,30";
  double hour = 17.0;
  double lat = 41.26, lon = -95.93;
  int year = 2019;
  std::string out_file;
};

int run_sun_sweep(const SunSweepArgs& a) {
  json arr = json::array();
  for (int month : parse_int_list(a.months)) {
    for (const SunSample& s :
         sun_sweep(a.year, month, parse_int_list(a.days), a.hour, a.lat, a.lon)) {
      arr.push_back({{"date", s.label},
                     {"azimuth_deg", s.azimuth_deg},
                     {"elevation_deg", s.elevation_deg},
                     {"enu", {s.enu.x(), s.enu.y(), s.enu.z()}}});
    }
  }
  if (a.out_file.empty()) {
    std::cout << arr.dump(2) << "\n";
  } else {
    std::ofstream(a.out_file) << arr.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal satellite neural radiance field pipeline"};
  app.require_subcommand(1);
  app.footer(
      "Environment: PLANETNERF_OUTPUT_DIR (default --out), "
      "PLANETNERF_THREADS (render/eval worker count)");

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic seasonal dataset bundle");
  cmd_synth->add_option("--out", synth.out, "Output bundle directory");
  cmd_synth->add_option("--views", synth.views, "Number of training views (months cycle 1..12)");
  cmd_synth->add_option("--grid", synth.grid, "Image and DSM resolution in pixels");
  cmd_synth->add_option("--seed", synth.seed, "Generator seed");
  cmd_synth->add_option("--palette", synth.palette, "seasonal | equinox | flat:r,g,b");
  cmd_synth->add_option("--snow-months", synth.snow, "Comma-separated snow months");
  cmd_synth->add_option("--camera", synth.camera, "pinhole | rpc");
  cmd_synth->add_option("--test-months", synth.test_months,
                        "Append one held-out test view per listed month");
  cmd_synth->add_option("--extent", synth.extent, "Terrain extent in meters");
  cmd_synth->add_option("--texture", synth.texture, "Albedo texture amplitude in [0,1)");
  cmd_synth->add_option("--alt-min", synth.alt_min, "Scene altitude lower bound [m]");
  cmd_synth->add_option("--alt-max", synth.alt_max, "Scene altitude upper bound [m]");
  cmd_synth->add_option("--lat", synth.lat, "Scene latitude [deg]");
  cmd_synth->add_option("--lon", synth.lon, "Scene longitude [deg]");
  cmd_synth->add_option("--year", synth.year, "Acquisition year for the ephemeris");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train a field on a dataset bundle");
  cmd_train->add_option("--data", train.data, "Dataset bundle directory")->required();
  cmd_train->add_option("--out", train.out, "Run directory (checkpoints, metrics log)");
  cmd_train->add_option("--variant", train.variant, "sn | me | pe | pn");
  cmd_train->add_option("--config", train.config_file, "Flat key=value config file");
  cmd_train->add_option("--downsample", train.downsample, "Integer downsample factor");
  cmd_train->add_option("--epochs", train.cfg.epochs, "Training epochs");
  cmd_train->add_option("--seed", train.cfg.seed, "Training seed");
  cmd_train->add_option("--rays-per-batch", train.cfg.rays_per_batch, "Rays per batch");
  cmd_train->add_option("--batches-per-epoch", train.cfg.batches_per_epoch,
                        "Batches per epoch (0: full pass)");
  cmd_train->add_option("--lr", train.cfg.learning_rate, "Initial learning rate");
  cmd_train->add_option("--lr-decay", train.cfg.lr_decay, "Per-epoch decay factor");
  cmd_train->add_option("--activation-epoch", train.cfg.activation_epoch,
                        "Epoch at which the season head activates");
  cmd_train->add_option("--beta-min", train.cfg.beta_min, "Uncertainty floor");
  cmd_train->add_option("--lambda-s", train.cfg.lambda_solar, "Solar-correction weight");
  cmd_train->add_option("--width", train.cfg.trunk_width, "Trunk width");
  cmd_train->add_option("--depth", train.cfg.trunk_depth, "Trunk depth");
  cmd_train->add_option("--skip-layer", train.cfg.skip_layer, "Skip connection layer (-1: none)");
  cmd_train->add_option("--ns", train.cfg.n_samples, "Samples per ray");
  cmd_train->add_option("--sun-hidden", train.cfg.sun_hidden, "Sun head hidden width");
  cmd_train->add_option("--uncertainty-hidden", train.cfg.uncertainty_hidden,
                        "Uncertainty head hidden width");

  RenderArgs render;
  auto* cmd_render = app.add_subcommand("render", "Render a novel month / sun direction");
  cmd_render->add_option("--checkpoint", render.checkpoint, "Checkpoint file")->required();
  cmd_render->add_option("--data", render.data, "Dataset bundle (camera source)")->required();
  cmd_render->add_option("--out", render.out, "Output directory");
  cmd_render->add_option("--image-id", render.image_id, "Camera image id (default: first test)");
  cmd_render->add_option("--month", render.month, "Month embedding to render (1..12)")
      ->required();
  cmd_render->add_option("--sun-date", render.sun_date, "ISO-8601 instant for the sun direction");
  cmd_render->add_flag("--sun-from-metadata", render.sun_from_metadata,
                       "Use the camera image's recorded sun direction");
  cmd_render->add_option("--size", render.size, "Override output resolution");
  cmd_render->add_option("--seed", render.seed, "Sampling seed");

  SweepArgs sweep;
  auto* cmd_sweep = app.add_subcommand("sweep", "Month/day sun sweep renders + PSNR matrix");
  cmd_sweep->add_option("--checkpoint", sweep.checkpoint, "Checkpoint file")->required();
  cmd_sweep->add_option("--data", sweep.data, "Dataset bundle (camera source)")->required();
  cmd_sweep->add_option("--out", sweep.out, "Output directory");
  cmd_sweep->add_option("--months", sweep.months, "Comma-separated months");
  cmd_sweep->add_option("--days", sweep.days, "Comma-separated days of month");
  cmd_sweep->add_option("--hour", sweep.hour, "UTC hour");
  cmd_sweep->add_option("--year", sweep.year, "Year");
  cmd_sweep->add_option("--image-id", sweep.image_id, "Camera image id");
  cmd_sweep->add_option("--seed", sweep.seed, "Sampling seed");

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "Score checkpoints on the test split");
  cmd_eval->add_option("--checkpoints", eval.checkpoints, "Comma-separated checkpoint files")
      ->required();
  cmd_eval->add_option("--labels", eval.labels, "Comma-separated variant labels");
  cmd_eval->add_option("--data", eval.data, "Dataset bundle directory")->required();
  cmd_eval->add_option("--out", eval.out, "Output directory");
  cmd_eval->add_flag("--bias-removal", eval.bias_removal,
                     "Subtract the mean altitude bias before MAE");
  cmd_eval->add_option("--downsample", eval.downsample, "Integer downsample factor");

  SunSweepArgs sun;
  auto* cmd_sun = app.add_subcommand("sun-sweep", "Ephemeris-only sun direction table (JSON)");
  cmd_sun->add_option("--months", sun.months, "Comma-separated months");
  cmd_sun->add_option("--days", sun.days, "Comma-separated days");
  cmd_sun->add_option("--hour", sun.hour, "UTC hour");
  cmd_sun->add_option("--lat", sun.lat, "Latitude [deg]");
  cmd_sun->add_option("--lon", sun.lon, "Longitude [deg]");
  cmd_sun->add_option("--year", sun.year, "Year");
  cmd_sun->add_option("--out", sun.out_file, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_train->parsed()) {
      std::vector<std::string> set_flags;
      for (const auto* opt : cmd_train->get_options())
        if (opt->count() > 0) set_flags.push_back(opt->get_name());
      return run_train(train, set_flags);
    }
    if (cmd_render->parsed()) return run_render(render);
    if (cmd_sweep->parsed()) return run_sweep(sweep);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_sun->parsed()) return run_sun_sweep(sun);
  } catch (const TrainingError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
