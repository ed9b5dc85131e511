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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifa/ifa_decode.hpp"
#include "ifa/metrics.hpp"
#include "ifa/nn.hpp"
#include "ifa/train.hpp"

namespace ifa {

enum class EvalMode { kConventional, kIfaLine, kIfaFullpage };

std::string_view to_string(EvalMode mode);
/// "conventional", "ifa-line" or "ifa-fullpage".
EvalMode parse_eval_mode(std::string_view text);
/// Comma-separated list; duplicates are dropped, order is canonical.
std::vector<EvalMode> parse_eval_modes(std::string_view text);

/// Module call counts accumulated while one mode ran.
struct Invocations {
  std::uint64_t backbone = 0;
  std::uint64_t classifier = 0;
  std::uint64_t squeeze = 0;
  std::uint64_t decoder = 0;
};

struct ModeResult {
  double cer = 0.0;  // percent, corpus level: total edits / total reference symbols
  EditCounts counts;
  int samples = 0;
  Invocations invocations;
};

struct EvalReport {
  Mode model_mode = Mode::kExCTC;
  std::map<EvalMode, ModeResult> modes;
  std::optional<double> ar, cr;  // percent, IFA-fullpage pages
  std::optional<double> g1;      // CER_conventional - CER_ifa-line
  std::optional<double> g2;      // CER_ifa-line - CER_ifa-fullpage
  double runtime_seconds = 0.0;

  /// JSON text. Runtime is included only when asked, so that reports of
  /// identical runs compare equal byte for byte.
  std::string to_json(bool include_runtime) const;
};

struct EvalSets {
  std::vector<Sample> lines;
  std::vector<Sample> pages;
};

EvalSets load_eval_sets(const std::filesystem::path& data_dir, const std::vector<EvalMode>& modes);

/// Throws InputError when a mode cannot run on this model.
EvalReport evaluate(const Model& model, const EvalSets& data, const std::vector<EvalMode>& modes,
                    const DecodeParams& params, int threads = 1);

}  // namespace ifa
