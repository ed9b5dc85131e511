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

#include <optional>
#include <span>
#include <vector>

#include "ifa/charset.hpp"
#include "ifa/nn.hpp"
#include "ifa/tensor.hpp"

namespace ifa {

/// Blank-interleaved label (blank, s1, blank, s2, ..., sT, blank) with the
/// skip transitions allowed by the CTC lattice.
struct CtcExtendedLabel {
  std::vector<int> states;
  std::vector<bool> can_skip;  // states[s] may be entered from states[s - 2]

  explicit CtcExtendedLabel(const LabelSequence& label, int blank = Charset::kBlank);
  std::size_t size() const { return states.size(); }
  /// Frames needed: one per character plus a blank between equal neighbours.
  std::size_t min_frames() const;
};

/// -log P(label | logprobs) over all CTC alignments, by log-space
/// forward-backward. logprobs is [W, K]. Throws InfeasibleLabelError when the
/// label needs more than W frames.
Tensor ctc_loss(const Tensor& logprobs, const LabelSequence& label, int blank = Charset::kBlank);

/// Sum over steps of -log softmax(y_t)[target_t]; targets are the label
/// followed by EOS, so exactly label.length() + 1 step logits are required.
Tensor attention_ce_loss(std::span<const Tensor> step_logits, const LabelSequence& label, int eos);

/// h_k = 0 for in-label classes, blank and EOS; 1 otherwise.
std::vector<double> hollow_mask(const LabelSequence& label, const Charset& charset);

/// y_k = sum over pixels of probs[k, h, w], shape [K].
Tensor aggregate_probabilities(const DensePrediction& pred);

/// (1/K) * sum_k h_k y_k.
Tensor wh_ace_loss(const DensePrediction& pred, const LabelSequence& label, const Charset& charset);

struct LossParts {
  Mode mode = Mode::kExCTC;
  Tensor alignment;  // CTC loss or the summed attention steps
  Tensor wh_ace;     // undefined when the run has WH-ACE disabled
};

/// alignment + wh_ace with unit weights, or alignment alone when
/// `use_wh_ace` is false. Throws InputError on mode or part mismatch.
Tensor combined_loss(Mode mode, const LossParts& parts, bool use_wh_ace);

}  // namespace ifa
