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

#pragma once

#include <Eigen/Core>

#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ifa/errors.hpp"

namespace ifa {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

// One vertex of the reverse-mode graph. A node with a backward function is an
// interior result; a node without one is a leaf. The backward function reads
// `self.grad` and accumulates into the parents it captured.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until materialized
  bool requires_grad = false;
  bool consumed = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node& self)> backward_fn;

  std::span<double> grad_buffer();  // allocates zeros on first use
};

}  // namespace detail

/// Dense row-major tensor of doubles. Copies are shallow: two Tensor handles
/// copied from one another refer to the same storage and the same graph node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  Index dim(int axis) const;
  Index size() const;

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double at(std::initializer_list<Index> index) const;

  /// Row-major view of a rank-2 tensor.
  ConstMatrixMap matrix() const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// A fresh leaf holding a copy of the values, outside any graph.
  Tensor detach(bool requires_grad = false) const;

  /// Node identity; equal for handles sharing storage.
  const void* id() const { return node_.get(); }

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<detail::Node> node);

 private:
  std::shared_ptr<detail::Node> node_;
};

/// While alive, ops on this thread record no graph (inference).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

/// Creates the result of a custom differentiable op. `backward_fn` receives
/// the result node (with its gradient filled) and must accumulate into the
/// inputs through their nodes' grad_buffer().
Tensor record_op(const char* op, Shape shape, std::vector<double> value,
                 std::initializer_list<Tensor> inputs, std::function<void(detail::Node&)> backward_fn);

/// Accumulates d(loss)/d(leaf) into every grad-tracked leaf reachable from
/// `loss`, then releases the interior graph. Calling it a second time on the
/// same loss throws GraphError.
void backward(const Tensor& loss);

}  // namespace ifa
