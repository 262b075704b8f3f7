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

// Differentiable operations over Tensor. Convolution-style ops accept either
// [C x T] or batched [B x C x T] inputs and return the same rank.

#include <cstddef>

#include "mbmelgan/tensor.hpp"

namespace mbmelgan {

enum class PadMode { Zero, Reflect };

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t groups = 1;
  // Symmetric padding; a negative value selects "same" padding, which keeps
  // T unchanged at stride 1.
  long padding = -1;
  PadMode pad_mode = PadMode::Zero;
};

// weight [C_out x C_in/groups x K]; bias [C_out] or undefined.
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const Conv1dOptions& options = {});

// Output length for conv1d with the given options.
std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                 const Conv1dOptions& options);

// Learnable upsampling. weight [C_out x C_in x K] with K == 2 * stride; the
// output has exactly stride * T samples.
Tensor conv_transpose1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        std::size_t stride);

// Crop offset that makes a K = 2*stride transposed convolution emit stride*T
// samples.
std::size_t transposed_padding(std::size_t stride);

// max(x, slope*x). The derivative at exactly 0 is taken as slope.
Tensor leaky_relu(const Tensor& input, double slope);
Tensor tanh_act(const Tensor& input);

// Windowed mean over the last axis; padded positions are excluded from the
// divisor.
Tensor avg_pool1d(const Tensor& input, std::size_t kernel, std::size_t stride,
                  std::size_t padding);

// w[o, ...] = g[o] * v[o, ...] / ||v[o, ...]||_2 per output channel (axis 0).
Tensor weight_norm(const Tensor& g, const Tensor& v);

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor log_op(const Tensor& a);

// mean((a - target)^2) as a scalar.
Tensor mean_squared_error_to(const Tensor& a, double target);
// mean(|a - b|) as a scalar; the derivative at a == b is 0.
Tensor mean_abs_error(const Tensor& a, const Tensor& b);

}  // namespace mbmelgan
