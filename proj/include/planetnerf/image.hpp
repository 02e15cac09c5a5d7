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

#include "planetnerf/common.hpp"

namespace planetnerf {

// Row-major interleaved image, values in working precision. Reflectance
// images live in [0,1]; rasters (altitude, opacity) are unconstrained.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0)
      : height_(height), width_(width), channels_(channels),
        data_(static_cast<std::size_t>(height) * width * channels, fill) {
    if (height <= 0 || width <= 0 || channels <= 0)
      throw ValidationError("image dimensions must be positive");
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  double& at(int r, int c, int ch = 0) {
    return data_[(static_cast<std::size_t>(r) * width_ + c) * channels_ + ch];
  }
  double at(int r, int c, int ch = 0) const {
    return data_[(static_cast<std::size_t>(r) * width_ + c) * channels_ + ch];
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool same_shape(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Storage format of an image on disk; preserved across load/save round trips.
enum class PixelFormat { kU8, kU16, kF32 };

struct LoadedImage {
  Image image;
  PixelFormat format = PixelFormat::kU8;
};

// PNG (8/16-bit) or TIFF (float32) depending on the file extension.
LoadedImage read_image(const std::string& path);
void write_image(const std::string& path, const Image& image, PixelFormat format);

// Area-averaging downsample by an integer factor; trailing rows/cols that do
// not fill a full block are dropped.
Image downsample_area(const Image& image, int factor);

}  // namespace planetnerf
