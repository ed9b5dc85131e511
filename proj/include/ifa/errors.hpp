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

#include <stdexcept>
#include <string>

namespace ifa {

/// Incompatible tensor shapes or an invalid axis.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Misuse of the autodiff graph: non-scalar loss, detached or consumed graph.
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad user-facing input: images too small, unknown characters, bad configs.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The CTC label cannot be aligned to the available number of frames.
class InfeasibleLabelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// CER / AR / CR requested against an empty reference.
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or truncated file (checkpoint, PGM, manifest).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ifa
