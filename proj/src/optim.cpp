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

#include "mbmelgan/optim.hpp"

#include <cmath>
#include <string>

#include "mbmelgan/error.hpp"

namespace mbmelgan {

Adam::Adam(std::vector<Tensor> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void Adam::step(double learning_rate) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].has_grad()) {
      throw Error("adam: parameter " + std::to_string(i) + " has no gradient");
    }
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double bc1 = 1.0 - std::pow(options_.beta1, t);
  const double bc2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto data = params_[i].data_mut();
    const auto grad = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double g = grad[j];
      m[j] = options_.beta1 * m[j] + (1.0 - options_.beta1) * g;
      v[j] = options_.beta2 * v[j] + (1.0 - options_.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      data[j] -= learning_rate * mhat / (std::sqrt(vhat) + options_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::restore(std::int64_t step_count, std::vector<std::vector<double>> first,
                   std::vector<std::vector<double>> second) {
  if (first.size() != params_.size() || second.size() != params_.size()) {
    throw FormatError("adam: moment count does not match parameter count");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (first[i].size() != params_[i].numel() || second[i].size() != params_[i].numel()) {
      throw FormatError("adam: moment shape mismatch for parameter " + std::to_string(i));
    }
  }
  step_count_ = step_count;
  m_ = std::move(first);
  v_ = std::move(second);
}

}  // namespace mbmelgan
