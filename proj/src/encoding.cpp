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

#include "planetnerf/encoding.hpp"

#include <cmath>

namespace planetnerf {

Eigen::VectorXd positional_encode(const Eigen::VectorXd& x, const EncodingConfig& config) {
  if (config.num_frequencies < 1) throw ValidationError("num_frequencies must be >= 1");
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd out(config.output_dim(d));
  int offset = 0;
  if (config.include_identity) {
    out.head(d) = x;
    offset = d;
  }
  double freq = kPi;  // 2^k pi, k = 0
  for (int k = 0; k < config.num_frequencies; ++k) {
    for (int i = 0; i < d; ++i) out[offset + i] = std::sin(freq * x[i]);
    for (int i = 0; i < d; ++i) out[offset + d + i] = std::cos(freq * x[i]);
    offset += 2 * d;
    freq *= 2.0;
  }
  return out;
}

Eigen::MatrixXd positional_encode_batch(const Eigen::MatrixXd& x, const EncodingConfig& config) {
  if (config.num_frequencies < 1) throw ValidationError("num_frequencies must be >= 1");
  const int d = static_cast<int>(x.rows());
  Eigen::MatrixXd out(config.output_dim(d), x.cols());
  int offset = 0;
  if (config.include_identity) {
    out.topRows(d) = x;
    offset = d;
  }
  double freq = kPi;
  for (int k = 0; k < config.num_frequencies; ++k) {
    out.middleRows(offset, d) = (freq * x.array()).sin();
    out.middleRows(offset + d, d) = (freq * x.array()).cos();
    offset += 2 * d;
    freq *= 2.0;
  }
  return out;
}

}  // namespace planetnerf
