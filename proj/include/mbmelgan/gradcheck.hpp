// Copyright 2026 The mbmelgan Authors
//
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

#include <functional>
#include <vector>

#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

struct GradCheckResult {
  // max over inputs of max_i |analytic_i - numeric_i| / max(max_i |numeric_i|, floor)
  double max_relative_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_element = 0;
};

// Compares the adjoint gradients of a scalar function against central
// differences. `loss_fn` must rebuild the graph from `inputs` on every call;
// each input's gradient is reset before the analytic pass. The error of each
// input is normalized by the largest numeric derivative of that input, so the
// result is scale-free and stays finite where individual derivatives vanish.
GradCheckResult finite_diff_check(const std::function<Tensor()>& loss_fn,
                                  std::vector<Tensor> inputs, double epsilon = 1e-6,
                                  double floor = 1e-12);

}  // namespace mbmelgan
