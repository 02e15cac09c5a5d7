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

#include "planetnerf/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "planetnerf/solar.hpp"

namespace planetnerf {

namespace fs = std::filesystem;
using nlohmann::json;

std::optional<double> AltitudeRaster::sample(double x_m, double y_m) const {
  const int c = static_cast<int>(std::floor((x_m - transform.x0) / transform.dx));
  const int r = static_cast<int>(std::floor((transform.y0 - y_m) / transform.dy));
  if (r < 0 || r >= data.height() || c < 0 || c >= data.width()) return std::nullopt;
  const double v = data.at(r, c);
  if (v == nodata || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<int> SceneDataset::train_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (split[i] == SplitLabel::kTrain) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> SceneDataset::test_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < images.size(); ++i)
    if (split[i] == SplitLabel::kTest) out.push_back(static_cast<int>(i));
  return out;
}

void SceneDataset::validate() const {
  if (images.size() != split.size()) throw ConsistencyError("split labels out of sync with images");
  if (!(bounds.alt_max() > bounds.alt_min()))
    throw ConsistencyError("altitude range must be positive");
  std::set<int> train_months;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const ImageRecord& rec = images[i];
    if (std::abs(rec.sun_dir_enu.norm() - 1.0) > 1e-9)
      throw ConsistencyError("sun direction of " + rec.id + " is not unit length");
    if (rec.month_index != rec.acquired.month)
      throw ConsistencyError("month index of " + rec.id + " disagrees with acquisition date");
    for (double v : rec.pixels.data())
      if (v < 0.0 || v > 1.0 || !std::isfinite(v))
        throw ConsistencyError("pixel values of " + rec.id + " outside [0,1]");
    if (split[i] == SplitLabel::kTrain) train_months.insert(rec.month_index);
  }
  std::set<int> uncovered;
  for (int i : test_indices())
    if (!train_months.count(images[i].month_index)) uncovered.insert(images[i].month_index);
  if (!uncovered.empty()) {
    std::string months;
    for (int m : uncovered) months += (months.empty() ? "" : ", ") + std::to_string(m);
    throw ConsistencyError("test months without a same-month train image: " + months);
  }
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(path, "-", "cannot open file");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(path, "-", e.what());
  }
}

template <typename T>
T require(const json& j, const std::string& file, const std::string& key) {
  if (!j.contains(key)) throw ParseError(file, key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(file, key, e.what());
  }
}

std::array<double, 20> coeff20(const json& j, const std::string& file, const std::string& key) {
  auto v = require<std::vector<double>>(j, file, key);
  if (v.size() != 20)
    throw ParseError(file, key, "expected 20 coefficients, got " + std::to_string(v.size()));
  std::array<double, 20> out;
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

RpcModel rpc_from_json(const json& j, const std::string& file, int width, int height) {
  RpcModel m;
  m.row_num = coeff20(j, file, "row_num");
  m.row_den = coeff20(j, file, "row_den");
  m.col_num = coeff20(j, file, "col_num");
  m.col_den = coeff20(j, file, "col_den");
  m.lat_off = require<double>(j, file, "lat_off");
  m.lat_scale = require<double>(j, file, "lat_scale");
  m.lon_off = require<double>(j, file, "lon_off");
  m.lon_scale = require<double>(j, file, "lon_scale");
  m.alt_off = require<double>(j, file, "alt_off");
  m.alt_scale = require<double>(j, file, "alt_scale");
  m.row_off = require<double>(j, file, "row_off");
  m.row_scale = require<double>(j, file, "row_scale");
  m.col_off = require<double>(j, file, "col_off");
  m.col_scale = require<double>(j, file, "col_scale");
  m.width = width;
  m.height = height;
  return m;
}

json rpc_to_json(const RpcModel& m) {
  return {{"row_num", m.row_num}, {"row_den", m.row_den}, {"col_num", m.col_num},
          {"col_den", m.col_den}, {"lat_off", m.lat_off}, {"lat_scale", m.lat_scale},
          {"lon_off", m.lon_off}, {"lon_scale", m.lon_scale}, {"alt_off", m.alt_off},
          {"alt_scale", m.alt_scale}, {"row_off", m.row_off}, {"row_scale", m.row_scale},
          {"col_off", m.col_off}, {"col_scale", m.col_scale}};
}

PinholeCamera pinhole_from_json(const json& j, const std::string& file, int width, int height) {
  PinholeCamera cam;
  auto k = require<std::vector<double>>(j, file, "intrinsics");
  if (k.size() != 9) throw ParseError(file, "intrinsics", "expected 9 entries (3x3 row-major)");
  auto p = require<std::vector<double>>(j, file, "pose");
  if (p.size() != 12) throw ParseError(file, "pose", "expected 12 entries (3x4 row-major)");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) cam.intrinsics(r, c) = k[r * 3 + c];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) cam.rotation(r, c) = p[r * 4 + c];
    cam.translation[r] = p[r * 4 + 3];
  }
  cam.width = width;
  cam.height = height;
  return cam;
}

json pinhole_to_json(const PinholeCamera& cam) {
  std::vector<double> k, p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k.push_back(cam.intrinsics(r, c));
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.push_back(cam.rotation(r, c));
    p.push_back(cam.translation[r]);
  }
  return {{"intrinsics", k}, {"pose", p}};
}

// Scale a camera after the pixels were downsampled by `factor`.
void downscale_camera(Camera& camera, int factor) {
  if (factor == 1) return;
  const double inv = 1.0 / factor;
  if (auto* pin = std::get_if<PinholeCamera>(&camera.model)) {
    pin->intrinsics.row(0) *= inv;
    pin->intrinsics.row(1) *= inv;
    pin->width /= factor;
    pin->height /= factor;
  } else {
    auto& rpc = std::get<RpcModel>(camera.model);
    rpc.row_off *= inv;
    rpc.row_scale *= inv;
    rpc.col_off *= inv;
    rpc.col_scale *= inv;
    rpc.width /= factor;
    rpc.height /= factor;
  }
}

SceneBounds bounds_from_rpcs(const std::vector<ImageRecord>& images, const LocalFrame& frame) {
  bool any = false;
  SceneBounds b;
  b.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::max());
  b.hi = Eigen::Vector3d::Constant(std::numeric_limits<double>::lowest());
  for (const ImageRecord& rec : images) {
    const auto* rpc = std::get_if<RpcModel>(&rec.camera.model);
    if (!rpc) continue;
    any = true;
    const Eigen::Vector3d lo = frame.to_local(rpc->lat_off - rpc->lat_scale,
                                              rpc->lon_off - rpc->lon_scale,
                                              rpc->alt_off - rpc->alt_scale);
    const Eigen::Vector3d hi = frame.to_local(rpc->lat_off + rpc->lat_scale,
                                              rpc->lon_off + rpc->lon_scale,
                                              rpc->alt_off + rpc->alt_scale);
    b.lo = b.lo.cwiseMin(lo);
    b.hi = b.hi.cwiseMax(hi);
  }
  if (!any)
    throw ParseError("bounds.json", "-",
                     "missing, and no RPC metadata to derive scene bounds from");
  return b;
}

}  // namespace

SceneDataset load_dataset(const std::string& root, int downsample) {
  if (downsample < 1) throw ValidationError("downsample must be >= 1");
  const fs::path images_dir = fs::path(root) / "images";
  const fs::path meta_dir = fs::path(root) / "metadata";
  if (!fs::is_directory(images_dir) || !fs::is_directory(meta_dir))
    throw ConsistencyError("dataset layout missing images/ or metadata/ under " + root);

  std::map<std::string, fs::path> image_files;
  for (const auto& e : fs::directory_iterator(images_dir)) {
    const std::string ext = e.path().extension().string();
    if (ext == ".png" || ext == ".tif" || ext == ".tiff")
      image_files[e.path().stem().string()] = e.path();
  }
  std::map<std::string, fs::path> meta_files;
  for (const auto& e : fs::directory_iterator(meta_dir))
    if (e.path().extension() == ".json") meta_files[e.path().stem().string()] = e.path();

  if (image_files.empty()) throw ConsistencyError("no images found under " + root);
  if (image_files.size() != meta_files.size())
    throw ConsistencyError("image/metadata count mismatch: " +
                           std::to_string(image_files.size()) + " images vs " +
                           std::to_string(meta_files.size()) + " metadata files");

  SceneDataset ds;
  for (const auto& [id, img_path] : image_files) {
    auto meta_it = meta_files.find(id);
    if (meta_it == meta_files.end())
      throw ConsistencyError("image " + id + " has no metadata file");
    const std::string meta_path = meta_it->second.string();
    const json meta = read_json_file(meta_path);

    ImageRecord rec;
    rec.id = require<std::string>(meta, meta_path, "id");
    if (rec.id != id)
      throw ParseError(meta_path, "id", "does not match file stem '" + id + "'");
    rec.acquisition_date_raw = require<std::string>(meta, meta_path, "acquisition_date");
    try {
      rec.acquired = parse_iso8601_utc(rec.acquisition_date_raw);
    } catch (const ValidationError& e) {
      throw ParseError(meta_path, "acquisition_date", e.what());
    }
    rec.month_index = rec.acquired.month;
    rec.sun_azimuth_deg = require<double>(meta, meta_path, "sun_azimuth_deg");
    rec.sun_elevation_deg = require<double>(meta, meta_path, "sun_elevation_deg");
    rec.sun_dir_enu = azel_to_enu(rec.sun_azimuth_deg, rec.sun_elevation_deg);

    const int width = require<int>(meta, meta_path, "width");
    const int height = require<int>(meta, meta_path, "height");
    if (meta.contains("rpc"))
      rec.camera.model = rpc_from_json(meta.at("rpc"), meta_path, width, height);
    else if (meta.contains("pinhole"))
      rec.camera.model = pinhole_from_json(meta.at("pinhole"), meta_path, width, height);
    else
      throw ParseError(meta_path, "rpc/pinhole", "camera model missing");

    LoadedImage loaded = read_image(img_path.string());
    if (loaded.image.channels() != 3)
      throw ConsistencyError("image " + id + " is not 3-channel");
    if (loaded.image.width() != width || loaded.image.height() != height)
      throw ConsistencyError("image " + id + " size disagrees with metadata");
    rec.pixels = downsample_area(loaded.image, downsample);
    rec.source_format = loaded.format;
    downscale_camera(rec.camera, downsample);

    ds.images.push_back(std::move(rec));
  }
  ds.split.assign(ds.images.size(), SplitLabel::kTrain);

  const fs::path bounds_path = fs::path(root) / "bounds.json";
  if (fs::exists(bounds_path)) {
    const json b = read_json_file(bounds_path.string());
    const std::string bp = bounds_path.string();
    ds.frame.lat0_deg = require<double>(b, bp, "latitude_deg");
    ds.frame.lon0_deg = require<double>(b, bp, "longitude_deg");
    ds.bounds.lo = {require<double>(b, bp, "east_min_m"), require<double>(b, bp, "north_min_m"),
                    require<double>(b, bp, "alt_min_m")};
    ds.bounds.hi = {require<double>(b, bp, "east_max_m"), require<double>(b, bp, "north_max_m"),
                    require<double>(b, bp, "alt_max_m")};
  } else {
    double lat_acc = 0.0, lon_acc = 0.0;
    int n_rpc = 0;
    for (const ImageRecord& rec : ds.images)
      if (const auto* rpc = std::get_if<RpcModel>(&rec.camera.model)) {
        lat_acc += rpc->lat_off;
        lon_acc += rpc->lon_off;
        ++n_rpc;
      }
    if (n_rpc == 0)
      throw ParseError(bounds_path.string(), "-",
                       "missing, and no RPC metadata to derive scene bounds from");
    ds.frame.lat0_deg = lat_acc / n_rpc;
    ds.frame.lon0_deg = lon_acc / n_rpc;
    ds.bounds = bounds_from_rpcs(ds.images, ds.frame);
  }

  const fs::path dsm_path = fs::path(root) / "dsm.tif";
  if (fs::exists(dsm_path)) {
    const fs::path geo_path = fs::path(root) / "dsm_geo.json";
    if (!fs::exists(geo_path))
      throw ConsistencyError("dsm.tif present without dsm_geo.json in " + root);
    AltitudeRaster raster;
    LoadedImage dsm = read_image(dsm_path.string());
    if (dsm.image.channels() != 1) throw ConsistencyError("dsm.tif must be single-channel");
    raster.data = std::move(dsm.image);
    const json g = read_json_file(geo_path.string());
    const std::string gp = geo_path.string();
    raster.transform.x0 = require<double>(g, gp, "x0_m");
    raster.transform.y0 = require<double>(g, gp, "y0_m");
    raster.transform.dx = require<double>(g, gp, "pixel_size_m");
    raster.transform.dy = raster.transform.dx;
    if (g.contains("nodata")) raster.nodata = g.at("nodata");
    ds.gt_altitude = std::move(raster);
  }

  const fs::path split_path = fs::path(root) / "split.json";
  if (fs::exists(split_path)) {
    const json s = read_json_file(split_path.string());
    SplitPolicy policy;
    policy.explicit_test_ids =
        require<std::vector<std::string>>(s, split_path.string(), "test_ids");
    // An empty id list on disk means an all-train bundle, not policy splitting.
    if (!policy.explicit_test_ids.empty()) split_train_test(ds, policy);
  }
  ds.validate();
  return ds;
}

void save_dataset(const SceneDataset& dataset, const std::string& root) {
  fs::create_directories(fs::path(root) / "images");
  fs::create_directories(fs::path(root) / "metadata");
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const ImageRecord& rec = dataset.images[i];
    const char* ext = rec.source_format == PixelFormat::kF32 ? ".tif" : ".png";
    write_image((fs::path(root) / "images" / (rec.id + ext)).string(), rec.pixels,
                rec.source_format);
    json meta;
    meta["id"] = rec.id;
    meta["acquisition_date"] = rec.acquisition_date_raw;
    meta["sun_azimuth_deg"] = rec.sun_azimuth_deg;
    meta["sun_elevation_deg"] = rec.sun_elevation_deg;
    meta["width"] = rec.pixels.width();
    meta["height"] = rec.pixels.height();
    if (const auto* rpc = std::get_if<RpcModel>(&rec.camera.model))
      meta["rpc"] = rpc_to_json(*rpc);
    else
      meta["pinhole"] = pinhole_to_json(std::get<PinholeCamera>(rec.camera.model));
    std::ofstream f(fs::path(root) / "metadata" / (rec.id + ".json"));
    f << meta.dump(2) << "\n";
  }

  json b;
  b["latitude_deg"] = dataset.frame.lat0_deg;
  b["longitude_deg"] = dataset.frame.lon0_deg;
  b["east_min_m"] = dataset.bounds.lo.x();
  b["east_max_m"] = dataset.bounds.hi.x();
  b["north_min_m"] = dataset.bounds.lo.y();
  b["north_max_m"] = dataset.bounds.hi.y();
  b["alt_min_m"] = dataset.bounds.lo.z();
  b["alt_max_m"] = dataset.bounds.hi.z();
  std::ofstream(fs::path(root) / "bounds.json") << b.dump(2) << "\n";

  if (dataset.gt_altitude) {
    write_image((fs::path(root) / "dsm.tif").string(), dataset.gt_altitude->data,
                PixelFormat::kF32);
    json g;
    g["x0_m"] = dataset.gt_altitude->transform.x0;
    g["y0_m"] = dataset.gt_altitude->transform.y0;
    g["pixel_size_m"] = dataset.gt_altitude->transform.dx;
    g["nodata"] = dataset.gt_altitude->nodata;
    std::ofstream(fs::path(root) / "dsm_geo.json") << g.dump(2) << "\n";
  }

  json s;
  s["test_ids"] = json::array();
  for (int i : dataset.test_indices()) s["test_ids"].push_back(dataset.images[i].id);
  std::ofstream(fs::path(root) / "split.json") << s.dump(2) << "\n";
}

int season_of_month(int month) {
  if (month == 12 || month == 1 || month == 2) return 0;
  if (month <= 5) return 1;
  if (month <= 8) return 2;
  return 3;
}

void split_train_test(SceneDataset& dataset, const SplitPolicy& policy) {
  dataset.split.assign(dataset.images.size(), SplitLabel::kTrain);

  if (!policy.explicit_test_ids.empty()) {
    std::map<std::string, int> by_id;
    for (std::size_t i = 0; i < dataset.images.size(); ++i)
      by_id[dataset.images[i].id] = static_cast<int>(i);
    for (const std::string& id : policy.explicit_test_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw SplitError("test id not present in dataset: " + id);
      dataset.split[it->second] = SplitLabel::kTest;
    }
    std::set<int> train_months;
    for (int i : dataset.train_indices()) train_months.insert(dataset.images[i].month_index);
    std::set<int> uncovered;
    for (int i : dataset.test_indices())
      if (!train_months.count(dataset.images[i].month_index))
        uncovered.insert(dataset.images[i].month_index);
    if (!uncovered.empty()) {
      std::string months;
      for (int m : uncovered) months += (months.empty() ? "" : ", ") + std::to_string(m);
      throw SplitError("test months without train coverage: " + months);
    }
    return;
  }

  // One test image per season. Prefer a month that appears at least twice so
  // the month-coverage invariant survives the removal; with unique months the
  // split still represents every season (coverage is then unattainable).
  std::map<int, int> month_count;
  for (const ImageRecord& rec : dataset.images) ++month_count[rec.month_index];
  for (int season = 0; season < 4; ++season) {
    int chosen = -1;
    bool chosen_covered = false;
    for (std::size_t i = 0; i < dataset.images.size(); ++i) {
      if (season_of_month(dataset.images[i].month_index) != season) continue;
      const bool covered = month_count[dataset.images[i].month_index] >= 2;
      const bool better =
          chosen < 0 || (covered && !chosen_covered) ||
          (covered == chosen_covered && dataset.images[i].id < dataset.images[chosen].id);
      if (better) {
        chosen = static_cast<int>(i);
        chosen_covered = covered;
      }
    }
    if (chosen < 0) {
      static const char* kSeasons[4] = {"winter", "spring", "summer", "fall"};
      throw SplitError(std::string("cannot represent season ") + kSeasons[season] +
                       ": no image from its months");
    }
    dataset.split[chosen] = SplitLabel::kTest;
  }
}

}  // namespace planetnerf
