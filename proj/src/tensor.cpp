/* Copyright 2026 The IFA Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ifa/tensor.hpp"

#include <sstream>
#include <unordered_set>

namespace ifa {

Index numel(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

std::span<double> Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

}  // namespace detail

Tensor::Tensor(Shape shape, double fill, bool requires_grad)
    : Tensor(shape, std::vector<double>(static_cast<std::size_t>(numel(shape)), fill),
             requires_grad) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (Index d : shape) {
    if (d < 0) throw DimensionError("negative extent in shape " + to_string(shape));
  }
  if (static_cast<Index>(values.size()) != numel(shape)) {
    throw DimensionError("shape " + to_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<double>{value}, requires_grad);
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

const Shape& Tensor::shape() const {
  if (!node_) throw GraphError("use of an undefined tensor");
  return node_->shape;
}

Index Tensor::dim(int axis) const {
  const auto& s = shape();
  if (axis < 0) axis += static_cast<int>(s.size());
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + to_string(s));
  }
  return s[static_cast<std::size_t>(axis)];
}

Index Tensor::size() const { return static_cast<Index>(node_ ? node_->value.size() : 0); }

std::span<const double> Tensor::values() const {
  if (!node_) throw GraphError("use of an undefined tensor");
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  if (!node_) throw GraphError("use of an undefined tensor");
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<Index> index) const {
  const auto& s = shape();
  if (index.size() != s.size()) throw DimensionError("index rank mismatch for " + to_string(s));
  Index flat = 0;
  std::size_t i = 0;
  for (Index v : index) {
    if (v < 0 || v >= s[i]) throw DimensionError("index out of range for " + to_string(s));
    flat = flat * s[i] + v;
    ++i;
  }
  return node_->value[static_cast<std::size_t>(flat)];
}

ConstMatrixMap Tensor::matrix() const {
  if (rank() != 2) throw DimensionError("matrix() needs rank 2, got " + to_string(shape()));
  return ConstMatrixMap(node_->value.data(), node_->shape[0], node_->shape[1]);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_ && !node_->backward_fn; }
bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw GraphError("gradient not materialized for tensor " + to_string(shape()));
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) throw GraphError("use of an undefined tensor");
  return node_->grad_buffer();
}

void Tensor::zero_grad() {
  if (node_) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach(bool requires_grad) const {
  return Tensor(shape(), node_->value, requires_grad);
}

namespace {
thread_local bool tls_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(tls_grad_enabled) { tls_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { tls_grad_enabled = previous_; }
bool grad_mode_enabled() { return tls_grad_enabled; }

Tensor record_op(const char* op, Shape shape, std::vector<double> value,
                 std::initializer_list<Tensor> inputs, std::function<void(detail::Node&)> backward_fn) {
  if (static_cast<Index>(value.size()) != numel(shape)) {
    throw DimensionError(std::string(op) + ": result shape " + to_string(shape) + " does not match " +
                         std::to_string(value.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (!tls_grad_enabled) return Tensor::from_node(std::move(node));
  bool tracked = false;
  for (const Tensor& in : inputs) {
    if (in.requires_grad() && in.node()->consumed) {
      throw GraphError(std::string(op) + ": input belongs to a graph that was already backpropagated");
    }
    tracked = tracked || in.requires_grad();
  }
  if (tracked) {
    node->requires_grad = true;
    for (const Tensor& in : inputs) node->parents.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor::from_node(std::move(node));
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw GraphError("backward on an undefined tensor");
  auto root = loss.node();
  if (root->value.size() != 1) {
    throw GraphError("backward needs a scalar loss, got shape " + to_string(root->shape));
  }
  if (root->consumed) throw GraphError("backward already ran on this loss; rebuild the graph");
  if (!root->requires_grad) throw GraphError("loss is detached from every tracked leaf");

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }

  for (detail::Node* node : order) {
    if (!node->backward_fn) continue;
    node->backward_fn = nullptr;
    node->parents.clear();
    if (node != root.get()) std::vector<double>().swap(node->grad);
    node->consumed = true;
  }
  root->consumed = true;
}

}  // namespace ifa
