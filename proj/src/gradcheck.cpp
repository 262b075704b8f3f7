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

#include "mbmelgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

GradCheckResult finite_diff_check(const std::function<Tensor()>& loss_fn,
                                  std::vector<Tensor> inputs, double epsilon, double floor) {
  for (auto& t : inputs) {
    if (!t.requires_grad()) throw Error("finite_diff_check: every input must require grad");
    t.clear_grad();
  }
  backward(loss_fn());
  std::vector<std::vector<double>> analytic;
  analytic.reserve(inputs.size());
  for (auto& t : inputs) {
    if (t.has_grad()) {
      analytic.emplace_back(t.grad().begin(), t.grad().end());
    } else {
      analytic.emplace_back(t.numel(), 0.0);
    }
  }

  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto data = inputs[i].data_mut();
    std::vector<double> numeric(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double saved = data[j];
      data[j] = saved + epsilon;
      const double plus = loss_fn().item();
      data[j] = saved - epsilon;
      const double minus = loss_fn().item();
      data[j] = saved;
      numeric[j] = (plus - minus) / (2.0 * epsilon);
    }
    double scale_ref = floor;
    for (double v : numeric) scale_ref = std::max(scale_ref, std::abs(v));
    for (std::size_t j = 0; j < numeric.size(); ++j) {
      const double err = std::abs(analytic[i][j] - numeric[j]) / scale_ref;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_input = i;
        result.worst_element = j;
      }
    }
  }
  return result;
}

}  // namespace mbmelgan
