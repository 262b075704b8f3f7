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

#include "mbmelgan/ops.hpp"

#include <cmath>
#include <string>

#include "conv_kernels.hpp"
#include "mbmelgan/error.hpp"

namespace mbmelgan {

namespace {

struct Layout3 {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t length = 0;
  bool batched = false;
};

Layout3 layout3(const Tensor& x, const char* op) {
  if (x.rank() == 2) return {1, x.size(0), x.size(1), false};
  if (x.rank() == 3) return {x.size(0), x.size(1), x.size(2), true};
  throw ShapeError(std::string(op) + ": expected [C x T] or [B x C x T] input, got " +
                   shape_str(x.shape()));
}

Shape shape3(const Layout3& l, std::size_t channels, std::size_t length) {
  if (l.batched) return {l.batch, channels, length};
  return {channels, length};
}

std::string num(std::size_t v) { return std::to_string(v); }

}  // namespace

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel,
                                 const Conv1dOptions& options) {
  const std::size_t total =
      options.padding < 0 ? options.dilation * (kernel - 1)
                          : 2 * static_cast<std::size_t>(options.padding);
  const std::size_t span = options.dilation * (kernel - 1) + 1;
  if (length + total < span) return 0;
  return (length + total - span) / options.stride + 1;
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const Conv1dOptions& options) {
  const Layout3 l = layout3(input, "conv1d");
  if (weight.rank() != 3) {
    throw ShapeError("conv1d: weight must be [C_out x C_in/groups x K], got " +
                     shape_str(weight.shape()));
  }
  kernels::ConvGeometry g;
  g.c_in = l.channels;
  g.c_out = weight.size(0);
  g.kernel = weight.size(2);
  g.stride = options.stride;
  g.dilation = options.dilation;
  g.groups = options.groups;
  g.pad_mode = options.pad_mode;
  if (g.groups == 0 || g.c_in % g.groups != 0) {
    throw ShapeError("conv1d: input channels C_in=" + num(g.c_in) +
                     " not divisible by groups=" + num(g.groups));
  }
  if (weight.size(1) * g.groups != g.c_in) {
    throw ShapeError("conv1d: weight dimension C_in/groups=" + num(weight.size(1)) +
                     " does not match input C_in=" + num(g.c_in) + " with groups=" +
                     num(g.groups));
  }
  if (g.c_out % g.groups != 0) {
    throw ShapeError("conv1d: output channels C_out=" + num(g.c_out) +
                     " not divisible by groups=" + num(g.groups));
  }
  if (g.kernel < 1 || g.dilation < 1 || g.stride < 1) {
    throw ConfigError("conv1d: kernel, dilation and stride must be >= 1");
  }
  if (bias.defined() && (bias.rank() != 1 || bias.size(0) != g.c_out)) {
    throw ShapeError("conv1d: bias must be [C_out=" + num(g.c_out) + "], got " +
                     shape_str(bias.shape()));
  }
  if (options.padding < 0) {
    const std::size_t total = g.dilation * (g.kernel - 1);
    g.pad_left = total / 2;
    g.pad_right = total - g.pad_left;
  } else {
    g.pad_left = g.pad_right = static_cast<std::size_t>(options.padding);
  }
  if (g.padded_length(l.length) < g.span()) {
    throw ShapeError("conv1d: padded input length T=" + num(g.padded_length(l.length)) +
                     " shorter than kernel span " + num(g.span()));
  }
  const std::size_t t_out = g.out_length(l.length);
  std::vector<double> out(l.batch * g.c_out * t_out);
  const double* bptr = bias.defined() ? bias.data().data() : nullptr;
  for (std::size_t b = 0; b < l.batch; ++b) {
    kernels::conv1d_forward<double>(g, input.data().data() + b * g.c_in * l.length,
                                    l.length, weight.data().data(), bptr,
                                    out.data() + b * g.c_out * t_out);
  }
  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return make_op_result(
      shape3(l, g.c_out, t_out), std::move(out), "conv1d", std::move(inputs),
      [g, l, t_out, has_bias](detail::Node& self) {
        auto& x = *self.inputs[0];
        auto& w = *self.inputs[1];
        double* gx = x.requires_grad ? x.grad_buffer().data() : nullptr;
        double* gw = w.requires_grad ? w.grad_buffer().data() : nullptr;
        double* gb = nullptr;
        if (has_bias && self.inputs[2]->requires_grad) gb = self.inputs[2]->grad_buffer().data();
        for (std::size_t b = 0; b < l.batch; ++b) {
          kernels::conv1d_backward<double>(
              g, x.data.data() + b * g.c_in * l.length, l.length, w.data.data(),
              self.grad.data() + b * g.c_out * t_out,
              gx ? gx + b * g.c_in * l.length : nullptr, gw, gb);
        }
      });
}

std::size_t transposed_padding(std::size_t stride) { return (stride + 1) / 2; }

Tensor conv_transpose1d(const Tensor& input, const Tensor& weight, const Tensor& bias,
                        std::size_t stride) {
  const Layout3 l = layout3(input, "conv_transpose1d");
  if (weight.rank() != 3) {
    throw ShapeError("conv_transpose1d: weight must be [C_out x C_in x K], got " +
                     shape_str(weight.shape()));
  }
  kernels::TransposedGeometry g;
  g.c_out = weight.size(0);
  g.c_in = weight.size(1);
  g.kernel = weight.size(2);
  g.stride = stride;
  if (stride < 1) throw ConfigError("conv_transpose1d: stride must be >= 1");
  if (g.kernel != 2 * stride) {
    throw ConfigError("conv_transpose1d: kernel size " + num(g.kernel) +
                      " must be twice the stride " + num(stride));
  }
  g.padding = transposed_padding(stride);
  if (g.c_in != l.channels) {
    throw ShapeError("conv_transpose1d: weight dimension C_in=" + num(g.c_in) +
                     " does not match input C_in=" + num(l.channels));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.size(0) != g.c_out)) {
    throw ShapeError("conv_transpose1d: bias must be [C_out=" + num(g.c_out) + "], got " +
                     shape_str(bias.shape()));
  }
  const std::size_t t_out = g.out_length(l.length);
  const auto wmat = kernels::transposed_weight_matrix<double>(g, weight.data().data());
  std::vector<double> out(l.batch * g.c_out * t_out);
  const double* bptr = bias.defined() ? bias.data().data() : nullptr;
  for (std::size_t b = 0; b < l.batch; ++b) {
    kernels::conv_transpose1d_forward<double>(g, wmat,
                                              input.data().data() + b * g.c_in * l.length,
                                              l.length, bptr, out.data() + b * g.c_out * t_out);
  }
  std::vector<Tensor> inputs{input, weight};
  if (bias.defined()) inputs.push_back(bias);
  const bool has_bias = bias.defined();
  return make_op_result(
      shape3(l, g.c_out, t_out), std::move(out), "conv_transpose1d", std::move(inputs),
      [g, l, t_out, has_bias](detail::Node& self) {
        auto& x = *self.inputs[0];
        auto& w = *self.inputs[1];
        const auto wmat = kernels::transposed_weight_matrix<double>(g, w.data.data());
        double* gx = x.requires_grad ? x.grad_buffer().data() : nullptr;
        double* gb = nullptr;
        if (has_bias && self.inputs[2]->requires_grad) gb = self.inputs[2]->grad_buffer().data();
        kernels::RowMat<double> gwmat;
        if (w.requires_grad) gwmat = kernels::RowMat<double>::Zero(wmat.rows(), wmat.cols());
        for (std::size_t b = 0; b < l.batch; ++b) {
          kernels::conv_transpose1d_backward<double>(
              g, wmat, x.data.data() + b * g.c_in * l.length, l.length,
              self.grad.data() + b * g.c_out * t_out,
              gx ? gx + b * g.c_in * l.length : nullptr,
              w.requires_grad ? &gwmat : nullptr, gb);
        }
        if (w.requires_grad) {
          auto& gw = w.grad_buffer();
          for (std::size_t co = 0; co < g.c_out; ++co)
            for (std::size_t ci = 0; ci < g.c_in; ++ci)
              for (std::size_t k = 0; k < g.kernel; ++k)
                gw[(co * g.c_in + ci) * g.kernel + k] +=
                    gwmat(static_cast<Eigen::Index>(co * g.kernel + k),
                          static_cast<Eigen::Index>(ci));
        }
      });
}

Tensor leaky_relu(const Tensor& input, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw ConfigError("leaky_relu: slope must lie in (0, 1), got " + std::to_string(slope));
  }
  const auto x = input.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
  return make_op_result(input.shape(), std::move(out), "leaky_relu", {input},
                        [slope](detail::Node& self) {
                          auto& in = *self.inputs[0];
                          auto& g = in.grad_buffer();
                          for (std::size_t i = 0; i < g.size(); ++i)
                            g[i] += self.grad[i] * (in.data[i] > 0.0 ? 1.0 : slope);
                        });
}

Tensor tanh_act(const Tensor& input) {
  const auto x = input.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
  return make_op_result(input.shape(), std::move(out), "tanh", {input},
                        [](detail::Node& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::size_t i = 0; i < g.size(); ++i)
                            g[i] += self.grad[i] * (1.0 - self.data[i] * self.data[i]);
                        });
}

Tensor avg_pool1d(const Tensor& input, std::size_t kernel, std::size_t stride,
                  std::size_t padding) {
  if (input.rank() < 1) throw ShapeError("avg_pool1d: input must have rank >= 1");
  if (kernel < stride || stride < 1) {
    throw ConfigError("avg_pool1d: kernel must be >= stride >= 1");
  }
  if (padding >= kernel) throw ConfigError("avg_pool1d: padding must be < kernel");
  const std::size_t t = input.shape().back();
  if (t + 2 * padding < kernel) {
    throw ShapeError("avg_pool1d: input length T=" + num(t) + " shorter than the window");
  }
  const std::size_t t_out = (t + 2 * padding - kernel) / stride + 1;
  const std::size_t rows = input.numel() / t;
  Shape out_shape = input.shape();
  out_shape.back() = t_out;
  const auto x = input.data();
  std::vector<double> out(rows * t_out);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < t_out; ++o) {
      const auto start = static_cast<std::ptrdiff_t>(o * stride) -
                         static_cast<std::ptrdiff_t>(padding);
      double acc = 0.0;
      std::size_t count = 0;
      for (std::size_t k = 0; k < kernel; ++k) {
        const auto j = start + static_cast<std::ptrdiff_t>(k);
        if (j >= 0 && j < static_cast<std::ptrdiff_t>(t)) {
          acc += x[r * t + static_cast<std::size_t>(j)];
          ++count;
        }
      }
      out[r * t_out + o] = acc / static_cast<double>(count);
    }
  }
  return make_op_result(
      std::move(out_shape), std::move(out), "avg_pool1d", {input},
      [=](detail::Node& self) {
        auto& g = self.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t o = 0; o < t_out; ++o) {
            const auto start = static_cast<std::ptrdiff_t>(o * stride) -
                               static_cast<std::ptrdiff_t>(padding);
            const auto lo = std::max<std::ptrdiff_t>(start, 0);
            const auto hi = std::min<std::ptrdiff_t>(start + static_cast<std::ptrdiff_t>(kernel),
                                                     static_cast<std::ptrdiff_t>(t));
            const double share = self.grad[r * t_out + o] / static_cast<double>(hi - lo);
            for (auto j = lo; j < hi; ++j) g[r * t + static_cast<std::size_t>(j)] += share;
          }
        }
      });
}

Tensor weight_norm(const Tensor& g, const Tensor& v) {
  if (v.rank() < 1 || g.rank() != 1 || g.size(0) != v.size(0)) {
    throw ShapeError("weight_norm: g must be [C_out=" + num(v.rank() ? v.size(0) : 0) +
                     "], got " + shape_str(g.shape()));
  }
  const std::size_t channels = v.size(0);
  const std::size_t per = v.numel() / channels;
  const auto vd = v.data();
  const auto gd = g.data();
  std::vector<double> norms(channels);
  std::vector<double> out(v.numel());
  for (std::size_t o = 0; o < channels; ++o) {
    double ss = 0.0;
    for (std::size_t j = 0; j < per; ++j) ss += vd[o * per + j] * vd[o * per + j];
    norms[o] = std::sqrt(ss);
    if (!(norms[o] > 0.0)) {
      throw NumericError("weight_norm: direction tensor has zero norm at output channel " +
                         num(o));
    }
    const double s = gd[o] / norms[o];
    for (std::size_t j = 0; j < per; ++j) out[o * per + j] = s * vd[o * per + j];
  }
  return make_op_result(
      v.shape(), std::move(out), "weight_norm", {g, v},
      [channels, per, norms = std::move(norms)](detail::Node& self) {
        auto& gn = *self.inputs[0];
        auto& vn = *self.inputs[1];
        for (std::size_t o = 0; o < channels; ++o) {
          const double* vv = vn.data.data() + o * per;
          const double* gw = self.grad.data() + o * per;
          double dot = 0.0;
          for (std::size_t j = 0; j < per; ++j) dot += gw[j] * vv[j];
          const double n = norms[o];
          if (gn.requires_grad) gn.grad_buffer()[o] += dot / n;
          if (vn.requires_grad) {
            double* gv = vn.grad_buffer().data() + o * per;
            const double s = gn.data[o] / n;
            const double c = dot / (n * n);
            for (std::size_t j = 0; j < per; ++j) gv[j] += s * (gw[j] - c * vv[j]);
          }
        }
      });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_op_result(a.shape(), std::move(out), "add", {a, b}, [](detail::Node& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      auto& g = in->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = factor * x[i];
  return make_op_result(a.shape(), std::move(out), "scale", {a},
                        [factor](detail::Node& self) {
                          auto& g = self.inputs[0]->grad_buffer();
                          for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
                        });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return make_op_result(Shape{1}, {acc}, "sum", {a}, [](detail::Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.numel());
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  return make_op_result(Shape{1}, {acc / n}, "mean", {a}, [n](detail::Node& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (double& v : g) v += self.grad[0] / n;
  });
}

Tensor log_op(const Tensor& a) {
  const auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw NumericError("log: non-positive input at element " + num(i));
    out[i] = std::log(x[i]);
  }
  return make_op_result(a.shape(), std::move(out), "log", {a}, [](detail::Node& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / in.data[i];
  });
}

Tensor mean_squared_error_to(const Tensor& a, double target) {
  const auto x = a.data();
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - target) * (v - target);
  return make_op_result(Shape{1}, {acc / n}, "mse", {a}, [target, n](detail::Node& self) {
    auto& in = *self.inputs[0];
    auto& g = in.grad_buffer();
    const double s = 2.0 * self.grad[0] / n;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * (in.data[i] - target);
  });
}

Tensor mean_abs_error(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mean_abs_error: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const auto x = a.data();
  const auto y = b.data();
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
  return make_op_result(Shape{1}, {acc / n}, "l1", {a, b}, [n](detail::Node& self) {
    auto& an = *self.inputs[0];
    auto& bn = *self.inputs[1];
    const double s = self.grad[0] / n;
    for (std::size_t i = 0; i < an.data.size(); ++i) {
      const double d = an.data[i] - bn.data[i];
      const double sg = d > 0.0 ? s : (d < 0.0 ? -s : 0.0);
      if (an.requires_grad) an.grad_buffer()[i] += sg;
      if (bn.requires_grad) bn.grad_buffer()[i] -= sg;
    }
  });
}

}  // namespace mbmelgan
