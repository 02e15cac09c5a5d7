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

#include "planetnerf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace planetnerf {

double psnr(const Image& a, const Image& b, double peak) {
  if (!a.same_shape(b)) throw ValidationError("psnr: image shapes differ");
  if (peak <= 0.0) throw ValidationError("psnr: peak must be positive");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data().size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWindow);
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter; output is the valid region only.
Image filter_valid(const Image& img, const std::vector<double>& k) {
  const int half = kWindow / 2;
  const int h = img.height(), w = img.width(), ch = img.channels();
  Image horiz(h, w - 2 * half, ch);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < horiz.width(); ++c)
      for (int d = 0; d < ch; ++d) {
        double acc = 0.0;
        for (int i = 0; i < kWindow; ++i) acc += k[i] * img.at(r, c + i, d);
        horiz.at(r, c, d) = acc;
      }
  Image out(h - 2 * half, w - 2 * half, ch);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c)
      for (int d = 0; d < ch; ++d) {
        double acc = 0.0;
        for (int i = 0; i < kWindow; ++i) acc += k[i] * horiz.at(r + i, c, d);
        out.at(r, c, d) = acc;
      }
  return out;
}

Image multiply(const Image& a, const Image& b) {
  Image out(a.height(), a.width(), a.channels());
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValidationError("ssim: image shapes differ");
  if (a.height() < kWindow || a.width() < kWindow)
    throw ValidationError("ssim: image smaller than the 11x11 window");
  const auto kernel = gaussian_kernel();
  const Image mu_a = filter_valid(a, kernel);
  const Image mu_b = filter_valid(b, kernel);
  const Image aa = filter_valid(multiply(a, a), kernel);
  const Image bb = filter_valid(multiply(b, b), kernel);
  const Image ab = filter_valid(multiply(a, b), kernel);

  constexpr double c1 = (kK1 * 1.0) * (kK1 * 1.0);
  constexpr double c2 = (kK2 * 1.0) * (kK2 * 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.data().size(); ++i) {
    const double ma = mu_a.data()[i], mb = mu_b.data()[i];
    const double va = aa.data()[i] - ma * ma;
    const double vb = bb.data()[i] - mb * mb;
    const double cov = ab.data()[i] - ma * mb;
    acc += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
           ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return acc / static_cast<double>(mu_a.data().size());
}

double altitude_mae(const Image& pred_alt, const Image& gt_alt, const Image& mask,
                    bool remove_bias) {
  if (!pred_alt.same_shape(gt_alt) || !pred_alt.same_shape(mask))
    throw ValidationError("altitude_mae: raster shapes differ");
  std::size_t n = 0;
  double bias = 0.0;
  if (remove_bias) {
    for (std::size_t i = 0; i < mask.data().size(); ++i)
      if (mask.data()[i] != 0.0) {
        bias += pred_alt.data()[i] - gt_alt.data()[i];
        ++n;
      }
    if (n == 0) throw EvalError("altitude_mae: empty mask");
    bias /= static_cast<double>(n);
    n = 0;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < mask.data().size(); ++i)
    if (mask.data()[i] != 0.0) {
      acc += std::abs(pred_alt.data()[i] - gt_alt.data()[i] - bias);
      ++n;
    }
  if (n == 0) throw EvalError("altitude_mae: empty mask");
  return acc / static_cast<double>(n);
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["variant"] = report.variant;
  nlohmann::json rows = nlohmann::json::array();
  for (const ImageScore& s : report.per_image) {
    nlohmann::json row;
    row["id"] = s.id;
    row["month"] = s.month;
    row["psnr_db"] = s.psnr_db;
    row["ssim"] = s.ssim;
    if (s.alt_mae_m)
      row["alt_mae_m"] = *s.alt_mae_m;
    else
      row["alt_mae_m"] = nullptr;
    row["masked_cells"] = s.masked_cells;
    rows.push_back(row);
  }
  j["per_image"] = rows;
  j["mean"] = {{"psnr_db", report.mean_psnr_db},
               {"ssim", report.mean_ssim},
               {"alt_mae_m", report.mean_alt_mae_m ? nlohmann::json(*report.mean_alt_mae_m)
                                                   : nlohmann::json(nullptr)}};
  return j.dump(2);
}

std::string reports_to_table(const std::vector<EvalReport>& reports) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof(line), "%-10s | %-8s | %-6s | %-12s\n", "Model", "PSNR", "SSIM",
                "Alt. MAE [m]");
  os << line;
  os << "-----------+----------+--------+-------------\n";
  for (const EvalReport& r : reports) {
    char mae[24];
    if (r.mean_alt_mae_m)
      std::snprintf(mae, sizeof(mae), "%.2f", *r.mean_alt_mae_m);
    else
      std::snprintf(mae, sizeof(mae), "n/a");
    std::snprintf(line, sizeof(line), "%-10s | %8.2f | %6.3f | %12s\n", r.variant.c_str(),
                  r.mean_psnr_db, r.mean_ssim, mae);
    os << line;
  }
  return os.str();
}

}  // namespace planetnerf
