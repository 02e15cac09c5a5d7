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

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "opencv2/core.hpp"
#include "opencv2/imgcodecs.hpp"
#include "planetnerf/image.hpp"

#include <fstream>

namespace planetnerf {

namespace {

// OpenCV loads color images BGR; internal layout is RGB.
int rgb_channel(int cv_channel, int channels) {
  return channels == 3 ? 2 - cv_channel : cv_channel;
}

// Minimal single-strip uncompressed float32 TIFF writer. OpenCV's encoder
// mangles 3-channel float TIFFs, so the float path is written by hand; the
// OpenCV decoder reads the result bit-exactly.
void write_float_tiff(const std::string& path, const Image& image) {
  const std::uint32_t w = image.width(), h = image.height();
  const std::uint16_t c = static_cast<std::uint16_t>(image.channels());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot open for writing: " + path);
  auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };

  const std::uint32_t data_offset = 8;
  const std::uint32_t data_bytes = w * h * c * 4;
  const std::uint32_t aux_offset = data_offset + data_bytes;  // per-sample tag arrays
  const std::uint32_t aux_bytes = c == 1 ? 0 : 2u * c * 2u;
  const std::uint32_t ifd_offset = aux_offset + aux_bytes;

  f.write("II", 2);
  u16(42);
  u32(ifd_offset);
  for (std::uint32_t r = 0; r < h; ++r)
    for (std::uint32_t col = 0; col < w; ++col)
      for (int k = 0; k < c; ++k) {
        const float v = static_cast<float>(image.at(static_cast<int>(r), static_cast<int>(col), k));
        f.write(reinterpret_cast<const char*>(&v), 4);
      }
  if (c != 1) {
    for (int k = 0; k < c; ++k) u16(32);  // BitsPerSample
    for (int k = 0; k < c; ++k) u16(3);   // SampleFormat: IEEE float
  }

  auto tag = [&](std::uint16_t id, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
    u16(id);
    u16(type);
    u32(count);
    u32(value);
  };
  u16(11);  // entry count
  tag(256, 4, 1, w);                                       // ImageWidth
  tag(257, 4, 1, h);                                       // ImageLength
  tag(258, 3, c, c == 1 ? 32 : aux_offset);                // BitsPerSample
  tag(259, 3, 1, 1);                                       // Compression: none
  tag(262, 3, 1, c == 1 ? 1 : 2);                          // Photometric
  tag(273, 4, 1, data_offset);                             // StripOffsets
  tag(277, 3, 1, c);                                       // SamplesPerPixel
  tag(278, 4, 1, h);                                       // RowsPerStrip
  tag(279, 4, 1, data_bytes);                              // StripByteCounts
  tag(284, 3, 1, 1);                                       // PlanarConfig: chunky
  tag(339, 3, c, c == 1 ? 3 : aux_offset + 2u * c);        // SampleFormat
  u32(0);  // next IFD
  if (!f) throw ValidationError("short write on " + path);
}

}  // namespace

LoadedImage read_image(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("image file not found: " + path);
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw ValidationError("failed to decode image: " + path);
  if (mat.channels() != 1 && mat.channels() != 3)
    throw ValidationError("unsupported channel count in " + path);

  LoadedImage out;
  out.image = Image(mat.rows, mat.cols, mat.channels());
  const int ch = mat.channels();
  double scale = 1.0;
  switch (mat.depth()) {
    case CV_8U:
      out.format = PixelFormat::kU8;
      scale = 1.0 / 255.0;
      break;
    case CV_16U:
      out.format = PixelFormat::kU16;
      scale = 1.0 / 65535.0;
      break;
    case CV_32F:
      out.format = PixelFormat::kF32;
      break;
    default:
      throw ValidationError("unsupported pixel depth in " + path);
  }
  for (int r = 0; r < mat.rows; ++r) {
    for (int c = 0; c < mat.cols; ++c) {
      for (int k = 0; k < ch; ++k) {
        double v = 0.0;
        if (mat.depth() == CV_8U)
          v = mat.ptr<std::uint8_t>(r)[c * ch + k] * scale;
        else if (mat.depth() == CV_16U)
          v = mat.ptr<std::uint16_t>(r)[c * ch + k] * scale;
        else
          v = mat.ptr<float>(r)[c * ch + k];
        out.image.at(r, c, rgb_channel(k, ch)) = v;
      }
    }
  }
  return out;
}

void write_image(const std::string& path, const Image& image, PixelFormat format) {
  const int ch = image.channels();
  if (ch != 1 && ch != 3) throw ValidationError("unsupported channel count for write: " + path);
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  if (format == PixelFormat::kF32) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext != ".tif" && ext != ".tiff")
      throw ValidationError("float32 images must use .tif: " + path);
    write_float_tiff(path, image);
    return;
  }
  int cv_depth = format == PixelFormat::kU8 ? CV_8U : format == PixelFormat::kU16 ? CV_16U : CV_32F;
  cv::Mat mat(image.height(), image.width(), CV_MAKETYPE(cv_depth, ch));
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      for (int k = 0; k < ch; ++k) {
        double v = image.at(r, c, rgb_channel(k, ch));
        if (format == PixelFormat::kU8)
          mat.ptr<std::uint8_t>(r)[c * ch + k] =
              static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        else if (format == PixelFormat::kU16)
          mat.ptr<std::uint16_t>(r)[c * ch + k] =
              static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
        else
          mat.ptr<float>(r)[c * ch + k] = static_cast<float>(v);
      }
    }
  }
  if (!cv::imwrite(path, mat)) throw ValidationError("failed to write image: " + path);
}

Image downsample_area(const Image& image, int factor) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  if (factor == 1) return image;
  const int oh = image.height() / factor;
  const int ow = image.width() / factor;
  if (oh == 0 || ow == 0) throw ValidationError("image too small for downsample factor");
  Image out(oh, ow, image.channels());
  const double inv = 1.0 / (static_cast<double>(factor) * factor);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      for (int k = 0; k < image.channels(); ++k) {
        double acc = 0.0;
        for (int dr = 0; dr < factor; ++dr)
          for (int dc = 0; dc < factor; ++dc) acc += image.at(r * factor + dr, c * factor + dc, k);
        out.at(r, c, k) = acc * inv;
      }
    }
  }
  return out;
}

}  // namespace planetnerf
