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

#include "ifa/gradcheck_suite.hpp"

#include <cmath>
#include <map>
#include <random>

#include "ifa/charset.hpp"
#include "ifa/losses.hpp"
#include "ifa/nn.hpp"
#include "ifa/ops.hpp"
#include "ifa/train.hpp"

namespace ifa {
namespace {

using Fn = std::function<Tensor(std::span<const Tensor>)>;

class Suite {
 public:
  Suite(std::uint64_t seed, double step) : rng_(seed), step_(step) {}

  /// Values in [lo, hi], sign chosen at random, so kinks at zero are avoided.
  Tensor input(Shape shape, double lo = 0.2, double hi = 1.5, bool signed_values = true) {
    std::uniform_real_distribution<double> mag(lo, hi);
    std::bernoulli_distribution neg(0.5);
    std::vector<double> v(static_cast<std::size_t>(numel(shape)));
    for (double& x : v) x = (signed_values && neg(rng_) ? -1.0 : 1.0) * mag(rng_);
    return Tensor(std::move(shape), std::move(v), true);
  }

  /// Reduces a tensor output to a scalar through fixed random weights.
  Tensor project(const Tensor& out) {
    auto it = weights_.find(out.shape());
    if (it == weights_.end()) {
      std::normal_distribution<double> n(0.0, 1.0);
      std::vector<double> w(static_cast<std::size_t>(out.size()));
      for (double& x : w) x = n(rng_);
      it = weights_.emplace(out.shape(), Tensor(out.shape(), std::move(w))).first;
    }
    return sum(multiply(out, it->second));
  }

  void check(const std::string& name, const Fn& fn, std::vector<Tensor> inputs) {
    cases_.push_back({name, check_gradients(fn, std::move(inputs), step_)});
  }

  void check_unary(const std::string& name, Tensor (*op)(const Tensor&), Tensor x) {
    check(name, [this, op](std::span<const Tensor> in) { return project(op(in[0])); }, {x});
  }

  std::mt19937_64& rng() { return rng_; }
  std::vector<GradCheckCase> take() { return std::move(cases_); }

 private:
  std::mt19937_64 rng_;
  double step_;
  std::map<Shape, Tensor> weights_;
  std::vector<GradCheckCase> cases_;
};

LabelSequence random_label(std::mt19937_64& rng, int length, int characters) {
  std::uniform_int_distribution<int> pick(1, characters);
  LabelSequence l;
  for (int i = 0; i < length; ++i) l.symbols.push_back(pick(rng));
  return l;
}

ModelConfig reduced_model(Mode mode, int classes) {
  ModelConfig c;
  c.mode = mode;
  c.num_classes = classes;
  c.channels = {3, 4};
  c.strides = {2, 2};
  c.squeeze_channels = 3;
  c.attention_size = 4;
  c.hidden_size = 3;
  c.embedding_size = 2;
  c.position_size = 4;
  c.seed = 11;
  return c;
}

GrayImage random_image(std::mt19937_64& rng, Index h, Index w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img(h, w);
  for (double& p : img.pixels) p = u(rng);
  return img;
}

}  // namespace

std::vector<GradCheckCase> run_gradient_suite(std::uint64_t seed, double step) {
  Suite s(seed, step);

  s.check("add", [&](auto in) { return s.project(add(in[0], in[1])); }, {s.input({3, 4}), s.input({3, 4})});
  s.check("broadcast_add", [&](auto in) { return s.project(broadcast_add(in[0], in[1])); },
          {s.input({2, 3, 4}), s.input({2, 1, 4})});
  s.check("multiply", [&](auto in) { return s.project(multiply(in[0], in[1])); },
          {s.input({3, 4}), s.input({3, 4})});
  s.check("multiply_broadcast", [&](auto in) { return s.project(multiply(in[0], in[1])); },
          {s.input({3, 4}), s.input({3, 1})});
  s.check("matmul", [&](auto in) { return s.project(matmul(in[0], in[1])); },
          {s.input({3, 5}), s.input({5, 2})});
  s.check("conv2d_stride1_pad1", [&](auto in) { return s.project(conv2d(in[0], in[1], 1, 1)); },
          {s.input({2, 5, 6}), s.input({3, 2, 3, 3})});
  s.check("conv2d_stride2_pad1", [&](auto in) { return s.project(conv2d(in[0], in[1], 2, 1)); },
          {s.input({2, 7, 6}), s.input({2, 2, 3, 3})});
  s.check("conv2d_stride1_pad0", [&](auto in) { return s.project(conv2d(in[0], in[1], 1, 0)); },
          {s.input({1, 4, 5}), s.input({2, 1, 2, 3})});
  s.check_unary("relu", &relu, s.input({4, 5}));
  s.check_unary("tanh", &ifa::tanh, s.input({4, 5}));
  s.check_unary("sigmoid", &sigmoid, s.input({4, 5}));
  s.check_unary("exp", &ifa::exp, s.input({4, 5}));
  s.check_unary("log", &ifa::log, s.input({4, 5}, 0.2, 2.0, false));
  s.check("softmax_axis0", [&](auto in) { return s.project(softmax(in[0], 0)); }, {s.input({4, 3})});
  s.check("softmax_axis1", [&](auto in) { return s.project(softmax(in[0], 1)); }, {s.input({4, 3})});
  s.check("softmax_rank3_mid", [&](auto in) { return s.project(softmax(in[0], 1)); }, {s.input({2, 3, 4})});
  s.check("sum", [&](auto in) { return scale(sum(in[0]), 0.7); }, {s.input({3, 4})});
  s.check("sum_axis", [&](auto in) { return s.project(sum(in[0], 1)); }, {s.input({2, 3, 4})});
  s.check("reshape", [&](auto in) { return s.project(reshape(in[0], Shape{6, 2})); }, {s.input({3, 4})});
  s.check("transpose", [&](auto in) { return s.project(transpose(in[0])); }, {s.input({3, 4})});
  s.check("slice", [&](auto in) { return s.project(slice(in[0], 1, 1, 3)); }, {s.input({3, 4})});
  s.check("concat", [&](auto in) { return s.project(concat(in, 0)); },
          {s.input({2, 3}), s.input({1, 3}), s.input({3, 3})});
  s.check("scale", [&](auto in) { return s.project(scale(in[0], -1.7)); }, {s.input({3, 4})});
  s.check("log_softmax", [&](auto in) { return s.project(log_softmax(in[0], 1)); }, {s.input({3, 4})});

  {
    const LabelSequence label{{1, 3, 3}};
    s.check("ctc_loss", [&](auto in) { return ctc_loss(log_softmax(in[0], 1), label); }, {s.input({7, 4})});
  }
  {
    const LabelSequence label{{2, 1}};
    s.check("attention_ce_loss", [&](auto in) { return attention_ce_loss(in, label, 4); },
            {s.input({5, 1}), s.input({5, 1}), s.input({5, 1})});
  }
  {
    const Charset charset("ABCDE", false);
    const LabelSequence label{{1, 4}};
    s.check("wh_ace_loss",
            [&](auto in) {
              DensePrediction pred{in[0], softmax(in[0], 0)};
              return wh_ace_loss(pred, label, charset);
            },
            {s.input({6, 3, 4})});
  }

  for (Mode mode : {Mode::kExCTC, Mode::kADP}) {
    const Charset charset = charset_for(mode);
    Model model(reduced_model(mode, charset.num_classes()));
    const GrayImage image = random_image(s.rng(), 12, 32);
    const LabelSequence label = random_label(s.rng(), 3, charset.num_characters());
    std::vector<Tensor> params;
    for (const auto& e : model.parameters().entries()) params.push_back(e.tensor);
    s.check(std::string("combined_step_") + std::string(to_string(mode)),
            [&](auto) { return combined_loss(mode, forward_losses(model, image, label, charset, true), true); },
            params);
  }
  return s.take();
}

}  // namespace ifa
