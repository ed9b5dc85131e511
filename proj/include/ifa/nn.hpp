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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifa/charset.hpp"
#include "ifa/image.hpp"
#include "ifa/tensor.hpp"

namespace ifa {

/// Training objective family. ADP trains through the attention decoder,
/// ExCTC through the column squeeze and CTC.
enum class Mode { kADP, kExCTC };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Ordered registry of named trainable leaves. Modules hold handles into it,
/// so a parameter used by two modules is one tensor.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  Tensor create(std::string name, Shape shape, std::vector<double> values);
  const Tensor& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<Entry>& entries() const { return entries_; }
  Index total_size() const;
  void zero_grad();
  /// Copies values from a registry with identical names and shapes.
  void copy_values_from(const ParameterSet& other);

 private:
  std::vector<Entry> entries_;
};

/// Thread-safe invocation count shared by copies of a module.
class InvocationCounter {
 public:
  void bump() const { count_->fetch_add(1, std::memory_order_relaxed); }
  std::uint64_t count() const { return count_->load(std::memory_order_relaxed); }
  void reset() const { count_->store(0); }

 private:
  std::shared_ptr<std::atomic<std::uint64_t>> count_ = std::make_shared<std::atomic<std::uint64_t>>(0);
};

/// conv -> per-channel scale and bias -> optional relu.
struct ConvBlock {
  Tensor kernel;  // [C_out, C_in, k, k]
  Tensor scale;   // [C_out, 1, 1]
  Tensor bias;    // [C_out, 1, 1]
  int stride = 1;
  int padding = 1;
  bool relu = true;
};

Tensor apply(const ConvBlock& block, const Tensor& input);

struct Backbone {
  std::vector<ConvBlock> blocks;
  InvocationCounter calls;

  int stride() const;
  Index channels() const;
  /// Smallest accepted image height and width.
  Index min_extent() const { return stride(); }
};

struct FeatureMap {
  Tensor values;  // [C, H, W]
  int stride = 1;

  Index channels() const { return values.dim(0); }
  Index height() const { return values.dim(1); }
  Index width() const { return values.dim(2); }
  /// [C, H*W] view (copied) with pixels in row-major order.
  Tensor flat() const;
};

/// Throws InputError for images below Backbone::min_extent or outside [0, 1].
FeatureMap extract_features(const GrayImage& image, const Backbone& backbone);

struct ClassifierHead {
  Tensor weight;  // [K, C]
  Tensor bias;    // [K]
  InvocationCounter calls;

  Index num_classes() const { return weight.dim(0); }
  Index channels() const { return weight.dim(1); }
  /// Classifies each column of a [C, N] matrix, giving [K, N] logits.
  Tensor apply(const Tensor& columns) const;
};

struct DensePrediction {
  Tensor logits;  // [K, H, W]
  Tensor probs;   // per-pixel softmax over K

  Index num_classes() const { return logits.dim(0); }
  Index height() const { return logits.dim(1); }
  Index width() const { return logits.dim(2); }
};

DensePrediction classify_dense(const FeatureMap& features, const ClassifierHead& head);

struct SqueezeModule {
  ConvBlock first;      // C -> C_mid, relu
  Tensor score_kernel;  // [1, C_mid, 3, 3]; no bias, the column softmax cancels it
  InvocationCounter calls;

  /// Score map e with shape [H, W].
  Tensor scores(const FeatureMap& features) const;
};

struct SqueezeResult {
  Tensor sequence;  // F' as [C, W]
  Tensor alpha;     // [H, W], each column sums to one
};

SqueezeResult column_squeeze(const FeatureMap& features, const SqueezeModule& squeeze);
/// The column attention for an explicit score map e of shape [H, W].
SqueezeResult squeeze_with_scores(const FeatureMap& features, const Tensor& scores);

/// Additive 2-D attention with a gated recurrent state.
struct AttentionDecoder {
  Tensor state_proj;     // [A, D]
  Tensor feature_proj;   // [A, C]
  Tensor position_proj;  // [A, P]
  Tensor score_vector;   // [1, A]
  Tensor embedding;      // [K + 1, E]; the last row is the start symbol
  Tensor gate_input;     // [3D, E + P]
  Tensor gate_hidden;    // [3D, D]
  Tensor gate_bias;      // [3D, 1]
  InvocationCounter calls;

  Index hidden_size() const { return state_proj.dim(1); }
  Index position_size() const { return position_proj.dim(1); }
  int start_symbol() const { return static_cast<int>(embedding.dim(0)) - 1; }
};

/// Fixed sinusoidal code for every grid cell, [P, H*W]. Half of the rows
/// encode the column, half the row.
Tensor positional_encoding(Index height, Index width, Index dims);

/// Per-image projections reused by every decoding step.
struct AttentionContext {
  Tensor features;   // [C, H*W]
  Tensor keys;       // [A, H*W] = W_f F + W_p pos
  Tensor positions;  // [P, H*W]
  Index height = 0;
  Index width = 0;
};

AttentionContext prepare_attention(const FeatureMap& features, const AttentionDecoder& decoder);

struct AttentionState {
  Tensor hidden;          // [D, 1]
  Tensor prev_embedding;  // [E, 1] symbol fed into the last update
  int step = 0;
};

AttentionState initial_state(const AttentionDecoder& decoder);

struct AttentionStep {
  Tensor alpha;    // [1, H*W] simplex
  Tensor context;  // [C, 1]
  Tensor logits;   // [K, 1]
  AttentionState next;
};

/// Weighted feature sum c = sum_n alpha_n F_n for features [C, N], alpha [1, N].
Tensor attend(const Tensor& features, const Tensor& alpha);

/// One decoding step. The recurrent update is fed `feed_symbol` (the target
/// under teacher forcing) or, when absent, the step's own argmax.
AttentionStep attention_step(const AttentionContext& context, const AttentionState& state,
                             const AttentionDecoder& decoder, const ClassifierHead& head,
                             std::optional<int> feed_symbol);

inline int max_decode_steps(Index height, Index width) { return static_cast<int>(2 * (height + width)); }

struct ModelConfig {
  Mode mode = Mode::kExCTC;
  int num_classes = 21;
  std::vector<int> channels{16, 32, 32, 32};
  std::vector<int> strides{2, 2, 1, 1};
  int squeeze_channels = 16;
  int attention_size = 32;
  int hidden_size = 64;
  int embedding_size = 16;
  int position_size = 16;
  double blank_bias = 0.0;  // initial classifier bias of the blank class
  std::uint64_t seed = 1;
};

/// Backbone, shared classifier head and the mode's alignment module.
class Model {
 public:
  explicit Model(ModelConfig config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }

  const Backbone& backbone() const { return backbone_; }
  const ClassifierHead& head() const { return head_; }
  const SqueezeModule* squeeze() const { return squeeze_ ? &*squeeze_ : nullptr; }
  const AttentionDecoder* decoder() const { return decoder_ ? &*decoder_ : nullptr; }

  /// Fresh model with the same architecture and copied parameter values.
  Model replica() const;

 private:
  ModelConfig config_;
  ParameterSet params_;
  Backbone backbone_;
  ClassifierHead head_;
  std::optional<SqueezeModule> squeeze_;
  std::optional<AttentionDecoder> decoder_;
};

/// Column squeeze + CTC best path (ExCTC) or greedy attention decoding to EOS
/// (ADP). Runs without recording a graph.
LabelSequence conventional_decode(const Model& model, const GrayImage& image, const Charset& charset);

}  // namespace ifa
