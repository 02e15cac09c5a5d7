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

#include <optional>
#include <string>
#include <vector>

#include "planetnerf/camera.hpp"
#include "planetnerf/geometry.hpp"
#include "planetnerf/image.hpp"

namespace planetnerf {

struct ImageRecord {
  std::string id;
  Image pixels;  // H x W x 3 reflectance in [0,1]
  PixelFormat source_format = PixelFormat::kU8;
  std::string acquisition_date_raw;  // original ISO-8601 string
  DateTimeUtc acquired;              // converted to UTC
  double sun_azimuth_deg = 0.0;
  double sun_elevation_deg = 0.0;
  Eigen::Vector3d sun_dir_enu = Eigen::Vector3d::UnitZ();
  Camera camera;
  int month_index = 1;  // 1..12, from the UTC acquisition date
};

enum class SplitLabel { kTrain, kTest };

// Raster in the local metric frame: cell (r, c) covers
// x in [x0 + c*dx, x0 + (c+1)*dx), y in (y0 - (r+1)*dy, y0 - r*dy].
struct GeoTransform {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 1.0;
  double dy = 1.0;
};

struct AltitudeRaster {
  Image data;  // H x W x 1, meters
  GeoTransform transform;
  double nodata = -9999.0;

  // Nearest-cell sample; nullopt outside the raster or at nodata cells.
  std::optional<double> sample(double x_m, double y_m) const;
};

struct SceneDataset {
  std::vector<ImageRecord> images;
  std::vector<SplitLabel> split;  // parallel to images
  LocalFrame frame;
  SceneBounds bounds;  // local meters; z span is the altitude range r_h
  std::optional<AltitudeRaster> gt_altitude;

  std::vector<int> train_indices() const;
  std::vector<int> test_indices() const;
  // Enforces the documented invariants (pixel range, unit sun directions,
  // month consistency, month coverage of the test split, positive altitude
  // range). Throws ConsistencyError.
  void validate() const;
};

// Reads a dataset bundle:
//   root/images/<id>.png|.tif, root/metadata/<id>.json,
//   root/dsm.tif + root/dsm_geo.json (optional),
//   root/bounds.json (optional; derived from RPC boxes when absent),
//   root/split.json (optional; everything is train when absent).
SceneDataset load_dataset(const std::string& root, int downsample);

// Writes the same layout. Images keep their source pixel format.
void save_dataset(const SceneDataset& dataset, const std::string& root);

struct SplitPolicy {
  std::vector<std::string> explicit_test_ids;  // empty: one-per-season policy
};

// Labels images train/test. One-per-season picks one test image per season
// (winter 12/1/2, spring 3/4/5, summer 6/7/8, fall 9/10/11), preferring
// months that keep a same-month train image. Explicit ids are validated
// strictly, including month coverage.
void split_train_test(SceneDataset& dataset, const SplitPolicy& policy);

int season_of_month(int month);  // 0 winter, 1 spring, 2 summer, 3 fall

}  // namespace planetnerf
