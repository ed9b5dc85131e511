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

#include <span>

#include "ifa/tensor.hpp"

namespace ifa {

// Differentiable primitives. Every function records a graph node when any
// input requires a gradient and is a plain computation otherwise.

Tensor add(const Tensor& a, const Tensor& b);

/// a + b where b has a's rank and every extent of b is 1 or equal to a's.
Tensor broadcast_add(const Tensor& a, const Tensor& b);

/// Elementwise a * b; b broadcasts under the same rule as broadcast_add.
Tensor multiply(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);

/// Cross-correlation of input [C_in, H, W] with kernel [C_out, C_in, kh, kw].
/// Output extents are floor((H + 2*padding - kh) / stride) + 1 (same for W).
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding);

Tensor relu(const Tensor& t);
Tensor tanh(const Tensor& t);
Tensor sigmoid(const Tensor& t);
Tensor exp(const Tensor& t);
Tensor log(const Tensor& t);

/// Max-subtracted softmax along `axis` (negative counts from the back).
Tensor softmax(const Tensor& t, int axis);

Tensor sum(const Tensor& t);
/// Sums out `axis`; the result has rank one less.
Tensor sum(const Tensor& t, int axis);

Tensor reshape(const Tensor& t, Shape shape);
Tensor transpose(const Tensor& t);

/// Elements [begin, end) along `axis`.
Tensor slice(const Tensor& t, int axis, Index begin, Index end);
Tensor concat(std::span<const Tensor> parts, int axis);

// Composites built only from the primitives above.

Tensor scale(const Tensor& t, double factor);
Tensor log_softmax(const Tensor& t, int axis);

}  // namespace ifa
