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

#include "mammodp/nn/tensor.hpp"

#include <numeric>
#include <sstream>
#include <unordered_set>

#include "mammodp/common/errors.hpp"

namespace mammodp::nn {
namespace {

thread_local bool g_grad_enabled = true;

}  // namespace

std::int64_t Numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) { return Full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::Full(Shape shape, double value, bool requires_grad) {
  const auto n = static_cast<std::size_t>(Numel(shape));
  return FromData(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::FromData(Shape shape, std::vector<double> values, bool requires_grad) {
  if (Numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw ContractViolation("tensor shape " + ShapeString(shape) + " does not match " +
                            std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (node_->value.size() != 1) throw ContractViolation("item() on non-scalar tensor " + ShapeString(shape()));
  return node_->value[0];
}

void Tensor::Backward() {
  if (numel() != 1) throw ContractViolation("Backward() requires a scalar, got " + ShapeString(shape()));
  if (!requires_grad()) return;

  // Iterative post-order DFS over the nodes that participate in the gradient.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->EnsureGrad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
  for (Node* node : order) {
    if (node->backward) {
      node->backward = nullptr;
      node->inputs.clear();
      if (node != node_.get()) node->grad.clear();
    }
  }
}

Tensor Tensor::Detach() const { return FromData(shape(), node_->value, false); }

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor MakeResult(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
                  std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool any = false;
  for (const Tensor& t : inputs) any = any || (t.defined() && t.requires_grad());
  if (g_grad_enabled && any) {
    node->requires_grad = true;
    for (const Tensor& t : inputs) {
      if (t.defined()) node->inputs.push_back(t.ptr());
    }
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

}  // namespace mammodp::nn
