// Copyright 2026 The mammodp Authors
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

#ifndef MAMMODP_NN_TENSOR_HPP_
#define MAMMODP_NN_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mammodp::nn {

using Shape = std::vector<std::int64_t>;

std::int64_t Numel(const Shape& shape);
std::string ShapeString(const Shape& shape);

// One vertex of the dynamic autodiff graph. Values are row-major doubles.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until something flows in
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this->grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& EnsureGrad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

// Shared handle onto a Node. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Full(Shape shape, double value, bool requires_grad = false);
  static Tensor FromData(Shape shape, std::vector<double> values, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::int64_t numel() const { return static_cast<std::int64_t>(node_->value.size()); }
  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  std::span<double> values() { return node_->value; }
  std::span<const double> values() const { return node_->value; }
  const double* data() const { return node_->value.data(); }
  double* mutable_data() { return node_->value.data(); }
  double item() const;

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<double> grad() { return node_->EnsureGrad(); }
  std::span<const double> grad() const { return node_->grad; }
  void ZeroGrad() { node_->grad.clear(); }

  // Reverse-mode sweep from a scalar. Intermediate graph is released after.
  void Backward();

  // Leaf copy of the current values, disconnected from the graph.
  Tensor Detach() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

bool GradEnabled();

// Disables graph construction in scope (evaluation, feature extraction).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Builds an op result. The graph edge is only kept when grad mode is on and
// some input requires grad.
Tensor MakeResult(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
                  std::function<void(Node&)> backward);

}  // namespace mammodp::nn

#endif  // MAMMODP_NN_TENSOR_HPP_
