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

// Dense real tensors with reverse-mode differentiation.
//
// A Tensor is a shared handle to a node holding row-major 64-bit data. Copying
// a Tensor copies the handle; use clone() for an independent copy. Operations
// whose inputs require gradients record a backward closure on the result, and
// backward() replays those closures in reverse topological order, after which
// the recorded graph is released.
//
// A recorded graph belongs to a single thread from forward to backward.
// Operations executed under NoGradGuard record nothing and may run
// concurrently over shared read-only tensors.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mbmelgan {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until the first accumulation
  bool requires_grad = false;
  bool leaf = true;
  bool consumed = false;
  std::string op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;

  // Gradient buffer, zero-filled on first use.
  std::vector<double>& grad_buffer();
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  std::span<double> data_mut();
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool value);
  bool is_leaf() const;
  const std::string& op_name() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> grad_mut();
  void zero_grad();
  void clear_grad();

  // New leaf with copied data and no gradient history.
  Tensor detach() const;
  Tensor clone() const;
  // Differentiable reshape; the element count must be unchanged.
  Tensor reshape(Shape shape) const;

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend Tensor make_op_result(Shape, std::vector<double>, std::string,
                               std::vector<Tensor>, detail::BackwardFn);
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Builds the result of an operation. The backward closure is attached only
// when recording is enabled and at least one input requires a gradient.
Tensor make_op_result(Shape shape, std::vector<double> data, std::string op,
                      std::vector<Tensor> inputs, detail::BackwardFn backward);

// Populates gradients on every leaf reachable from a scalar loss, then frees
// the recorded graph. Throws on a non-scalar loss, on a loss that does not
// require grad, and on a second call without a fresh forward pass.
void backward(const Tensor& loss);

}  // namespace mbmelgan
