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

#include "planetnerf/image.hpp"

namespace planetnerf {

// 10 log10(peak^2 / MSE); zero MSE returns the 99 dB cap so reports stay
// finite and sortable.
double psnr(const Image& a, const Image& b, double peak = 1.0);
constexpr double kPsnrCap = 99.0;

// Mean local SSIM, 11x11 Gaussian window sigma 1.5, k1 = 0.01, k2 = 0.03,
// dynamic range 1; windows fully inside the image; channel-mean for RGB.
double ssim(const Image& a, const Image& b);

// Mean absolute difference over cells where mask != 0. remove_bias subtracts
// the masked mean difference first (vertical-datum alignment).
double altitude_mae(const Image& pred_alt, const Image& gt_alt, const Image& mask,
                    bool remove_bias = false);

struct ImageScore {
  std::string id;
  int month = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> alt_mae_m;
  std::size_t masked_cells = 0;  // cells that entered the altitude comparison
};

struct EvalReport {
  std::string variant;
  std::vector<ImageScore> per_image;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;
  std::optional<double> mean_alt_mae_m;
};

std::string report_to_json(const EvalReport& report);
// Aligned text table, one row per variant: PSNR | SSIM | Alt. MAE columns.
std::string reports_to_table(const std::vector<EvalReport>& reports);

}  // namespace planetnerf
