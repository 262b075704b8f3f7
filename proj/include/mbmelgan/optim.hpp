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

#include <cstdint>
#include <vector>

#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are stored per parameter, index-aligned
// with the parameter list given at construction.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor> params, AdamOptions options = {});

  // Applies one update at the given learning rate. Every parameter must carry
  // a gradient.
  void step(double learning_rate);
  void zero_grad();

  std::int64_t step_count() const { return step_count_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor>& params() const { return params_; }

  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }
  // Restores optimizer state, e.g. from a checkpoint.
  void restore(std::int64_t step_count, std::vector<std::vector<double>> first,
               std::vector<std::vector<double>> second);

 private:
  std::vector<Tensor> params_;
  AdamOptions options_;
  std::int64_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace mbmelgan
