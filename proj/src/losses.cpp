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

#include "ifa/losses.hpp"

#include <cmath>
#include <limits>

#include "ifa/ops.hpp"

namespace ifa {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

CtcExtendedLabel::CtcExtendedLabel(const LabelSequence& label, int blank) {
  states.reserve(2 * label.length() + 1);
  states.push_back(blank);
  for (int s : label.symbols) {
    states.push_back(s);
    states.push_back(blank);
  }
  can_skip.assign(states.size(), false);
  for (std::size_t s = 2; s < states.size(); ++s) {
    can_skip[s] = states[s] != blank && states[s] != states[s - 2];
  }
}

std::size_t CtcExtendedLabel::min_frames() const {
  const std::size_t t = (states.size() - 1) / 2;
  std::size_t repeats = 0;
  for (std::size_t s = 3; s < states.size(); s += 2) {
    if (states[s] == states[s - 2]) ++repeats;
  }
  return t + repeats;
}

Tensor ctc_loss(const Tensor& logprobs, const LabelSequence& label, int blank) {
  if (logprobs.rank() != 2) throw DimensionError("ctc_loss expects [W, K] log-probabilities");
  const Index frames = logprobs.dim(0), classes = logprobs.dim(1);
  if (frames < 1) throw DimensionError("ctc_loss needs at least one frame");
  for (int s : label.symbols) {
    if (s < 0 || s >= classes || s == blank) throw InputError("label symbol out of range for ctc_loss");
  }
  const CtcExtendedLabel ext(label, blank);
  if (ext.min_frames() > static_cast<std::size_t>(frames)) {
    throw InfeasibleLabelError("label of length " + std::to_string(label.length()) + " needs " +
                               std::to_string(ext.min_frames()) + " frames, only " +
                               std::to_string(frames) + " available");
  }

  const Index S = static_cast<Index>(ext.size());
  auto lp = logprobs.values();
  auto emit = [&](Index w, Index s) { return lp[w * classes + ext.states[s]]; };

  // alpha[w][s]: paths over frames 0..w ending in state s; beta[w][s]: paths
  // from state s at frame w to the end, both including frame w's emission.
  std::vector<double> alpha(static_cast<std::size_t>(frames * S), kNegInf);
  std::vector<double> beta(static_cast<std::size_t>(frames * S), kNegInf);
  alpha[0] = emit(0, 0);
  if (S > 1) alpha[1] = emit(0, 1);
  for (Index w = 1; w < frames; ++w) {
    for (Index s = 0; s < S; ++s) {
      double acc = alpha[(w - 1) * S + s];
      if (s >= 1) acc = log_add(acc, alpha[(w - 1) * S + s - 1]);
      if (s >= 2 && ext.can_skip[s]) acc = log_add(acc, alpha[(w - 1) * S + s - 2]);
      if (acc != kNegInf) alpha[w * S + s] = acc + emit(w, s);
    }
  }
  const Index last = frames - 1;
  beta[last * S + S - 1] = emit(last, S - 1);
  if (S > 1) beta[last * S + S - 2] = emit(last, S - 2);
  for (Index w = last - 1; w >= 0; --w) {
    for (Index s = 0; s < S; ++s) {
      double acc = beta[(w + 1) * S + s];
      if (s + 1 < S) acc = log_add(acc, beta[(w + 1) * S + s + 1]);
      if (s + 2 < S && ext.can_skip[s + 2]) acc = log_add(acc, beta[(w + 1) * S + s + 2]);
      if (acc != kNegInf) beta[w * S + s] = acc + emit(w, s);
    }
  }
  const double log_likelihood =
      S > 1 ? log_add(alpha[last * S + S - 1], alpha[last * S + S - 2]) : alpha[last * S];

  // d(-log P)/d logprob[w, k] = -sum_{s: l'_s = k} exp(alpha + beta - emit - log P).
  auto grad = std::make_shared<std::vector<double>>(static_cast<std::size_t>(frames * classes), 0.0);
  for (Index w = 0; w < frames; ++w) {
    for (Index s = 0; s < S; ++s) {
      const double a = alpha[w * S + s], b = beta[w * S + s];
      if (a == kNegInf || b == kNegInf) continue;
      (*grad)[w * classes + ext.states[s]] -= std::exp(a + b - emit(w, s) - log_likelihood);
    }
  }

  auto input = logprobs.node();
  return record_op("ctc_loss", Shape{}, {-log_likelihood}, {logprobs}, [input, grad](detail::Node& self) {
    auto g = input->grad_buffer();
    const double upstream = self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += upstream * (*grad)[i];
  });
}

Tensor attention_ce_loss(std::span<const Tensor> step_logits, const LabelSequence& label, int eos) {
  const std::size_t steps = label.length() + 1;
  if (step_logits.size() != steps) {
    throw InputError("attention_ce_loss: " + std::to_string(step_logits.size()) + " steps for " +
                     std::to_string(steps) + " targets (label + EOS)");
  }
  std::vector<Tensor> rows;
  rows.reserve(steps);
  for (const Tensor& y : step_logits) rows.push_back(reshape(y, Shape{1, y.size()}));
  Tensor stacked = concat(rows, 0);  // [T+1, K]
  const Index classes = stacked.dim(1);
  std::vector<double> onehot(static_cast<std::size_t>(steps * classes), 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const int target = t < label.length() ? label.symbols[t] : eos;
    if (target < 0 || target >= classes) throw InputError("attention target out of range");
    onehot[t * classes + target] = 1.0;
  }
  Tensor picked = multiply(log_softmax(stacked, 1), Tensor(Shape{static_cast<Index>(steps), classes}, onehot));
  return scale(sum(picked), -1.0);
}

std::vector<double> hollow_mask(const LabelSequence& label, const Charset& charset) {
  std::vector<double> h(static_cast<std::size_t>(charset.num_classes()), 1.0);
  h[charset.blank()] = 0.0;
  if (charset.eos()) h[*charset.eos()] = 0.0;
  for (int s : label.symbols) h.at(static_cast<std::size_t>(s)) = 0.0;
  return h;
}

Tensor aggregate_probabilities(const DensePrediction& pred) {
  return sum(reshape(pred.probs, Shape{pred.num_classes(), pred.height() * pred.width()}), 1);
}

Tensor wh_ace_loss(const DensePrediction& pred, const LabelSequence& label, const Charset& charset) {
  if (pred.num_classes() != charset.num_classes()) {
    throw DimensionError("wh_ace_loss: prediction has " + std::to_string(pred.num_classes()) +
                         " classes, charset " + std::to_string(charset.num_classes()));
  }
  std::vector<double> weights = hollow_mask(label, charset);
  const double k = static_cast<double>(weights.size());
  for (double& v : weights) v /= k;
  Tensor weight_tensor(Shape{pred.num_classes()}, std::move(weights));
  return sum(multiply(aggregate_probabilities(pred), weight_tensor));
}

Tensor combined_loss(Mode mode, const LossParts& parts, bool use_wh_ace) {
  if (parts.mode != mode) {
    throw InputError("combined_loss: parts computed for " + std::string(to_string(parts.mode)) +
                     ", requested " + std::string(to_string(mode)));
  }
  if (!parts.alignment.defined()) throw InputError("combined_loss: missing alignment loss");
  if (!use_wh_ace) return parts.alignment;
  if (!parts.wh_ace.defined()) throw InputError("combined_loss: WH-ACE enabled but not computed");
  return add(parts.alignment, parts.wh_ace);
}

}  // namespace ifa
