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

#include "ifa/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ifa {

GradCheckResult check_gradients(const std::function<Tensor(std::span<const Tensor>)>& fn,
                                std::vector<Tensor> inputs, double step, double magnitude_floor) {
  for (Tensor& t : inputs) {
    if (!t.requires_grad()) throw GraphError("check_gradients: inputs must track gradients");
    t.zero_grad();
  }
  backward(fn(inputs));

  GradCheckResult result;
  for (Tensor& t : inputs) {
    std::vector<double> analytic(t.size(), 0.0);
    if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());
    auto values = t.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = fn(inputs).item();
      values[i] = saved - step;
      const double down = fn(inputs).item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double abs_err = std::abs(analytic[i] - numeric);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), magnitude_floor});
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      result.max_rel_error = std::max(result.max_rel_error, abs_err / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace ifa
