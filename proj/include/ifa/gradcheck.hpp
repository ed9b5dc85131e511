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

#include <functional>
#include <span>
#include <vector>

#include "ifa/tensor.hpp"

namespace ifa {

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients of a scalar function against central
/// finite differences. `fn` must rebuild its graph from the inputs on every
/// call. Per-coordinate error is |analytic - numeric| / max(|analytic|,
/// |numeric|, magnitude_floor).
GradCheckResult check_gradients(const std::function<Tensor(std::span<const Tensor>)>& fn,
                                std::vector<Tensor> inputs, double step = 1e-5,
                                double magnitude_floor = 1e-2);

}  // namespace ifa
