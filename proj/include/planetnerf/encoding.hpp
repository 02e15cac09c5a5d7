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

#include <Eigen/Core>

#include "planetnerf/common.hpp"

namespace planetnerf {

struct EncodingConfig {
  int num_frequencies = 10;      // N_f
  bool include_identity = false;

  int output_dim(int input_dim) const {
    return 2 * input_dim * num_frequencies + (include_identity ? input_dim : 0);
  }
};

// Frequency expansion of a bounded input. Layout, frequency-major:
//   [x (if include_identity),
//    sin(2^0 pi x_1..d), cos(2^0 pi x_1..d),
//    sin(2^1 pi x_1..d), cos(2^1 pi x_1..d), ...]
Eigen::VectorXd positional_encode(const Eigen::VectorXd& x, const EncodingConfig& config);

// Column-wise batched version; input d x S, output output_dim(d) x S.
Eigen::MatrixXd positional_encode_batch(const Eigen::MatrixXd& x, const EncodingConfig& config);

}  // namespace planetnerf
