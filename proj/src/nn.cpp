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

#include "ifa/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ifa/ops.hpp"

namespace ifa {

std::string_view to_string(Mode mode) { return mode == Mode::kADP ? "ADP" : "ExCTC"; }

Mode parse_mode(std::string_view text) {
  if (text == "ADP" || text == "adp") return Mode::kADP;
  if (text == "ExCTC" || text == "exctc") return Mode::kExCTC;
  throw InputError("unknown mode '" + std::string(text) + "' (expected ADP or ExCTC)");
}

Tensor ParameterSet::create(std::string name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw InputError("duplicate parameter name " + name);
  Tensor t(std::move(shape), std::move(values), /*requires_grad=*/true);
  entries_.push_back({std::move(name), t});
  return t;
}

const Tensor& ParameterSet::get(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw InputError("no parameter named " + std::string(name));
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

Index ParameterSet::total_size() const {
  Index n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  if (other.entries_.size() != entries_.size()) throw InputError("parameter sets differ in size");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& src = other.entries_[i];
    auto& dst = entries_[i];
    if (src.name != dst.name || src.tensor.shape() != dst.tensor.shape()) {
      throw InputError("parameter mismatch at " + dst.name);
    }
    std::copy(src.tensor.values().begin(), src.tensor.values().end(),
              dst.tensor.mutable_values().begin());
  }
}

Tensor apply(const ConvBlock& block, const Tensor& input) {
  Tensor x = conv2d(input, block.kernel, block.stride, block.padding);
  x = broadcast_add(multiply(x, block.scale), block.bias);
  return block.relu ? relu(x) : x;
}

int Backbone::stride() const {
  int s = 1;
  for (const auto& b : blocks) s *= b.stride;
  return s;
}

Index Backbone::channels() const { return blocks.back().kernel.dim(0); }

Tensor FeatureMap::flat() const { return reshape(values, Shape{channels(), height() * width()}); }

FeatureMap extract_features(const GrayImage& image, const Backbone& backbone) {
  if (image.height < backbone.min_extent() || image.width < backbone.min_extent()) {
    throw InputError("image " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                     " is smaller than the backbone minimum " + std::to_string(backbone.min_extent()));
  }
  for (double v : image.pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("image values must lie in [0, 1]");
  }
  backbone.calls.bump();
  Tensor x = to_tensor(image);
  for (const auto& block : backbone.blocks) x = apply(block, x);
  return FeatureMap{x, backbone.stride()};
}

Tensor ClassifierHead::apply(const Tensor& columns) const {
  if (columns.rank() != 2 || columns.dim(0) != channels()) {
    throw DimensionError("classifier expects [" + std::to_string(channels()) + " x N] features, got " +
                         to_string(columns.shape()));
  }
  calls.bump();
  return broadcast_add(matmul(weight, columns), reshape(bias, Shape{num_classes(), 1}));
}

DensePrediction classify_dense(const FeatureMap& features, const ClassifierHead& head) {
  Tensor logits = reshape(head.apply(features.flat()),
                          Shape{head.num_classes(), features.height(), features.width()});
  return DensePrediction{logits, softmax(logits, 0)};
}

Tensor SqueezeModule::scores(const FeatureMap& features) const {
  Tensor x = ifa::apply(first, features.values);
  Tensor e = conv2d(x, score_kernel, 1, 1);
  return reshape(e, Shape{features.height(), features.width()});
}

SqueezeResult squeeze_with_scores(const FeatureMap& features, const Tensor& scores) {
  const Index h = features.height(), w = features.width();
  if (scores.shape() != Shape{h, w}) {
    throw DimensionError("squeeze scores " + to_string(scores.shape()) + " do not match feature grid " +
                         to_string(Shape{h, w}));
  }
  Tensor alpha = softmax(scores, 0);
  Tensor weighted = multiply(features.values, reshape(alpha, Shape{1, h, w}));
  return SqueezeResult{sum(weighted, 1), alpha};
}

SqueezeResult column_squeeze(const FeatureMap& features, const SqueezeModule& squeeze) {
  squeeze.calls.bump();
  return squeeze_with_scores(features, squeeze.scores(features));
}

Tensor positional_encoding(Index height, Index width, Index dims) {
  if (dims < 4 || dims % 4 != 0) throw DimensionError("positional code size must be a multiple of 4");
  const Index per_axis = dims / 2, freqs = per_axis / 2;
  std::vector<double> code(static_cast<std::size_t>(dims * height * width));
  for (Index f = 0; f < freqs; ++f) {
    const double omega = std::pow(100.0, -static_cast<double>(f) / static_cast<double>(freqs));
    for (Index y = 0; y < height; ++y) {
      for (Index x = 0; x < width; ++x) {
        const Index cell = y * width + x;
        const Index n = height * width;
        code[(2 * f) * n + cell] = std::sin(omega * static_cast<double>(x));
        code[(2 * f + 1) * n + cell] = std::cos(omega * static_cast<double>(x));
        code[(per_axis + 2 * f) * n + cell] = std::sin(omega * static_cast<double>(y));
        code[(per_axis + 2 * f + 1) * n + cell] = std::cos(omega * static_cast<double>(y));
      }
    }
  }
  return Tensor(Shape{dims, height * width}, std::move(code));
}

AttentionContext prepare_attention(const FeatureMap& features, const AttentionDecoder& decoder) {
  AttentionContext ctx;
  ctx.height = features.height();
  ctx.width = features.width();
  ctx.features = features.flat();
  ctx.positions = positional_encoding(ctx.height, ctx.width, decoder.position_size());
  ctx.keys = add(matmul(decoder.feature_proj, ctx.features), matmul(decoder.position_proj, ctx.positions));
  return ctx;
}

namespace {

Tensor embed(const AttentionDecoder& decoder, int symbol) {
  if (symbol < 0 || symbol >= decoder.embedding.dim(0)) {
    throw InputError("symbol " + std::to_string(symbol) + " has no embedding");
  }
  return transpose(slice(decoder.embedding, 0, symbol, symbol + 1));
}

// Gated recurrent update h' = n + z (h - n).
Tensor gru(const AttentionDecoder& d, const Tensor& hidden, const Tensor& input) {
  const Index dh = d.hidden_size();
  Tensor gi = broadcast_add(matmul(d.gate_input, input), d.gate_bias);
  Tensor gh = matmul(d.gate_hidden, hidden);
  Tensor z = sigmoid(add(slice(gi, 0, 0, dh), slice(gh, 0, 0, dh)));
  Tensor r = sigmoid(add(slice(gi, 0, dh, 2 * dh), slice(gh, 0, dh, 2 * dh)));
  Tensor n = tanh(add(slice(gi, 0, 2 * dh, 3 * dh), multiply(r, slice(gh, 0, 2 * dh, 3 * dh))));
  return add(n, multiply(z, add(hidden, scale(n, -1.0))));
}

Tensor recurrent_input(const Tensor& embedding, const Tensor& location) {
  const Tensor parts[] = {embedding, location};
  return concat(parts, 0);
}

int argmax_column(const Tensor& logits) {
  auto v = logits.values();
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

AttentionState initial_state(const AttentionDecoder& decoder) {
  AttentionState state;
  state.prev_embedding = embed(decoder, decoder.start_symbol());
  Tensor zero_hidden(Shape{decoder.hidden_size(), 1});
  Tensor no_location(Shape{decoder.position_size(), 1});
  state.hidden = gru(decoder, zero_hidden, recurrent_input(state.prev_embedding, no_location));
  state.step = 0;
  return state;
}

Tensor attend(const Tensor& features, const Tensor& alpha) { return matmul(features, transpose(alpha)); }

AttentionStep attention_step(const AttentionContext& context, const AttentionState& state,
                             const AttentionDecoder& decoder, const ClassifierHead& head,
                             std::optional<int> feed_symbol) {
  if (state.step >= max_decode_steps(context.height, context.width)) {
    throw InputError("attention step " + std::to_string(state.step) + " exceeds the decoding limit");
  }
  decoder.calls.bump();
  AttentionStep out;
  Tensor query = matmul(decoder.state_proj, state.hidden);
  Tensor energy = matmul(decoder.score_vector, tanh(broadcast_add(context.keys, query)));
  out.alpha = softmax(energy, 1);
  out.context = attend(context.features, out.alpha);
  out.logits = head.apply(out.context);

  const int symbol = feed_symbol ? *feed_symbol : argmax_column(out.logits);
  out.next.prev_embedding = embed(decoder, symbol);
  Tensor location = attend(context.positions, out.alpha);
  out.next.hidden = gru(decoder, state.hidden, recurrent_input(out.next.prev_embedding, location));
  out.next.step = state.step + 1;
  return out;
}

namespace {

std::vector<double> normal_values(std::mt19937_64& rng, Index n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = dist(rng);
  return v;
}

ConvBlock make_block(ParameterSet& params, std::mt19937_64& rng, const std::string& prefix, int cin,
                     int cout, int stride, bool relu_after) {
  ConvBlock b;
  const Index fan_in = static_cast<Index>(cin) * 9;
  b.kernel = params.create(prefix + ".kernel", Shape{cout, cin, 3, 3},
                           normal_values(rng, cout * fan_in, std::sqrt(2.0 / static_cast<double>(fan_in))));
  b.scale = params.create(prefix + ".scale", Shape{cout, 1, 1}, std::vector<double>(cout, 1.0));
  b.bias = params.create(prefix + ".bias", Shape{cout, 1, 1}, std::vector<double>(cout, 0.0));
  b.stride = stride;
  b.padding = 1;
  b.relu = relu_after;
  return b;
}

}  // namespace

Model::Model(ModelConfig config) : config_(std::move(config)) {
  if (config_.channels.empty() || config_.channels.size() != config_.strides.size()) {
    throw InputError("backbone channels and strides must be non-empty and of equal length");
  }
  std::mt19937_64 rng(config_.seed);
  int cin = 1;
  for (std::size_t i = 0; i < config_.channels.size(); ++i) {
    backbone_.blocks.push_back(make_block(params_, rng, "backbone.block" + std::to_string(i), cin,
                                          config_.channels[i], config_.strides[i], true));
    cin = config_.channels[i];
  }
  const Index c = cin, k = config_.num_classes;
  head_.weight = params_.create("head.weight", Shape{k, c},
                                normal_values(rng, k * c, 1.0 / std::sqrt(static_cast<double>(c))));
  std::vector<double> bias(static_cast<std::size_t>(k), 0.0);
  bias[Charset::kBlank] = config_.blank_bias;
  head_.bias = params_.create("head.bias", Shape{k}, std::move(bias));

  if (config_.mode == Mode::kExCTC) {
    SqueezeModule s;
    s.first = make_block(params_, rng, "squeeze.block0", cin, config_.squeeze_channels, 1, true);
    const Index fan_in = static_cast<Index>(config_.squeeze_channels) * 9;
    s.score_kernel = params_.create("squeeze.score_kernel", Shape{1, config_.squeeze_channels, 3, 3},
                                    normal_values(rng, fan_in, 1.0 / std::sqrt(static_cast<double>(fan_in))));
    squeeze_ = std::move(s);
  } else {
    const Index a = config_.attention_size, d = config_.hidden_size, e = config_.embedding_size,
                p = config_.position_size;
    auto init = [&](const std::string& name, Shape shape, Index fan_in) {
      return params_.create(name, shape,
                            normal_values(rng, numel(shape), 1.0 / std::sqrt(static_cast<double>(fan_in))));
    };
    AttentionDecoder dec;
    dec.state_proj = init("attention.state_proj", Shape{a, d}, d);
    dec.feature_proj = init("attention.feature_proj", Shape{a, c}, c);
    dec.position_proj = init("attention.position_proj", Shape{a, p}, p);
    dec.score_vector = init("attention.score_vector", Shape{1, a}, a);
    dec.embedding = init("attention.embedding", Shape{k + 1, e}, 1);
    dec.gate_input = init("attention.gate_input", Shape{3 * d, e + p}, e + p);
    dec.gate_hidden = init("attention.gate_hidden", Shape{3 * d, d}, d);
    dec.gate_bias = params_.create("attention.gate_bias", Shape{3 * d, 1},
                                   std::vector<double>(static_cast<std::size_t>(3 * d), 0.0));
    decoder_ = std::move(dec);
  }
}

Model Model::replica() const {
  Model m(config_);
  m.params_.copy_values_from(params_);
  return m;
}

LabelSequence conventional_decode(const Model& model, const GrayImage& image, const Charset& charset) {
  NoGradGuard no_grad;
  FeatureMap features = extract_features(image, model.backbone());
  LabelSequence out;
  if (const SqueezeModule* squeeze = model.squeeze()) {
    Tensor logits = model.head().apply(column_squeeze(features, *squeeze).sequence);
    const Index k = logits.dim(0), w = logits.dim(1);
    auto v = logits.values();
    int previous = charset.blank();
    for (Index col = 0; col < w; ++col) {
      int best = 0;
      for (Index c = 1; c < k; ++c) {
        if (v[c * w + col] > v[best * w + col]) best = static_cast<int>(c);
      }
      if (best != previous && charset.is_character(best)) out.symbols.push_back(best);
      previous = best;
    }
    return out;
  }
  const AttentionDecoder& decoder = *model.decoder();
  AttentionContext ctx = prepare_attention(features, decoder);
  AttentionState state = initial_state(decoder);
  const int limit = max_decode_steps(ctx.height, ctx.width);
  while (state.step < limit) {
    AttentionStep step = attention_step(ctx, state, decoder, model.head(), std::nullopt);
    const int symbol = argmax_column(step.logits);
    if (charset.eos() && symbol == *charset.eos()) break;
    if (charset.is_character(symbol)) out.symbols.push_back(symbol);
    state = std::move(step.next);
  }
  return out;
}

}  // namespace ifa
