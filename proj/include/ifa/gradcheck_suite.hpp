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

#include <cstdint>
#include <string>
#include <vector>

#include "ifa/gradcheck.hpp"

namespace ifa {

struct GradCheckCase {
  std::string name;
  GradCheckResult result;
};

/// Finite-difference checks of every primitive, the three losses and one
/// full combined training step per mode on a reduced model.
std::vector<GradCheckCase> run_gradient_suite(std::uint64_t seed = 7, double step = 1e-5);

}  // namespace ifa
