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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ifa/gradcheck.hpp"
#include "ifa/losses.hpp"
#include "ifa/nn.hpp"
#include "ifa/ops.hpp"

using namespace ifa;

namespace {

Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(numel(shape)));
  for (double& x : v) x = u(rng);
  return Tensor(std::move(shape), std::move(v));
}

ModelConfig small_config(Mode mode) {
  ModelConfig c;
  c.mode = mode;
  c.num_classes = mode == Mode::kADP ? 22 : 21;
  c.channels = {4, 6};
  c.strides = {2, 2};
  c.squeeze_channels = 3;
  c.attention_size = 5;
  c.hidden_size = 4;
  c.embedding_size = 3;
  c.position_size = 4;
  return c;
}

}  // namespace

TEST_CASE("extract_features shapes") {
  Model model(ModelConfig{});
  CHECK(model.backbone().stride() == 4);
  CHECK(model.backbone().channels() == 32);

  FeatureMap f = extract_features(GrayImage(32, 64), model.backbone());
  CHECK(f.values.shape() == Shape{32, 8, 16});
  CHECK(f.stride == 4);
  for (double v : f.values.values()) CHECK(std::isfinite(v));

  CHECK(extract_features(GrayImage(80, 1200), model.backbone()).values.shape() == Shape{32, 20, 300});
  CHECK_THROWS_AS(extract_features(GrayImage(3, 64), model.backbone()), InputError);
  CHECK_THROWS_AS(extract_features(GrayImage(32, 64, 1.5), model.backbone()), InputError);
}

TEST_CASE("classify_dense") {
  SUBCASE("identity head passes features through") {
    std::mt19937_64 rng(1);
    FeatureMap f{random_tensor(rng, {3, 2, 4}), 1};
    ClassifierHead head{Tensor(Shape{3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1}), Tensor(Shape{3}, 0.0), {}};
    DensePrediction p = classify_dense(f, head);
    CHECK(std::vector<double>(p.logits.values().begin(), p.logits.values().end()) ==
          std::vector<double>(f.values.values().begin(), f.values.values().end()));
    Tensor totals = sum(p.probs, 0);
    for (double v : totals.values()) CHECK(std::abs(v - 1.0) <= 1e-9);
  }
  SUBCASE("hand example") {
    FeatureMap f{Tensor(Shape{2, 1, 1}, {1, 0}), 1};
    ClassifierHead head{Tensor(Shape{2, 2}, {2, 0, 0, 2}), Tensor(Shape{2}, 0.0), {}};
    DensePrediction p = classify_dense(f, head);
    CHECK(p.logits.at({0, 0, 0}) == 2.0);
    CHECK(p.logits.at({1, 0, 0}) == 0.0);
  }
  SUBCASE("channel mismatch") {
    FeatureMap f{Tensor(Shape{3, 2, 2}), 1};
    ClassifierHead head{Tensor(Shape{2, 2}), Tensor(Shape{2}), {}};
    CHECK_THROWS_AS(classify_dense(f, head), DimensionError);
  }
}

TEST_CASE("column squeeze") {
  std::mt19937_64 rng(2);
  FeatureMap f{random_tensor(rng, {3, 4, 5}), 4};

  SUBCASE("constant scores average each column") {
    SqueezeResult r = squeeze_with_scores(f, Tensor(Shape{4, 5}, 0.7));
    for (Index c = 0; c < 3; ++c) {
      for (Index w = 0; w < 5; ++w) {
        double mean = 0.0;
        for (Index h = 0; h < 4; ++h) mean += f.values.at({c, h, w}) / 4.0;
        CHECK(r.sequence.at({c, w}) == doctest::Approx(mean).epsilon(1e-12));
      }
    }
    for (double a : r.alpha.values()) CHECK(a == doctest::Approx(0.25));
  }
  SUBCASE("dominant score selects its pixel") {
    std::vector<double> e(20, 0.0);
    for (Index w = 0; w < 5; ++w) e[static_cast<std::size_t>(((w % 4) * 5) + w)] = 50.0;
    SqueezeResult r = squeeze_with_scores(f, Tensor(Shape{4, 5}, e));
    for (Index c = 0; c < 3; ++c)
      for (Index w = 0; w < 5; ++w) CHECK(std::abs(r.sequence.at({c, w}) - f.values.at({c, w % 4, w})) <= 1e-9);
  }
  SUBCASE("columns are simplexes and shift invariant") {
    Tensor e = random_tensor(rng, {4, 5}, -3, 3);
    SqueezeResult a = squeeze_with_scores(f, e);
    Tensor totals = sum(a.alpha, 0);
    for (double v : totals.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    Tensor shifted = broadcast_add(e, random_tensor(rng, {1, 5}, -5, 5));
    SqueezeResult b = squeeze_with_scores(f, shifted);
    for (Index i = 0; i < a.sequence.size(); ++i) {
      CHECK(a.sequence.values()[i] == doctest::Approx(b.sequence.values()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("module output is one score per cell") {
    Model model(small_config(Mode::kExCTC));
    FeatureMap g = extract_features(GrayImage(16, 24, 0.5), model.backbone());
    CHECK(model.squeeze()->scores(g).shape() == Shape{g.height(), g.width()});
  }
}

TEST_CASE("attention") {
  std::mt19937_64 rng(3);
  Tensor feats = random_tensor(rng, {3, 6});
  SUBCASE("one-hot attention returns the attended feature") {
    Tensor alpha(Shape{1, 6}, {0, 0, 0, 0, 1, 0});
    Tensor c = attend(feats, alpha);
    for (Index k = 0; k < 3; ++k) CHECK(c.at({k, 0}) == feats.at({k, 4}));
  }
  SUBCASE("uniform attention returns the mean") {
    Tensor c = attend(feats, Tensor(Shape{1, 6}, 1.0 / 6.0));
    for (Index k = 0; k < 3; ++k) {
      double mean = 0.0;
      for (Index n = 0; n < 6; ++n) mean += feats.at({k, n}) / 6.0;
      CHECK(c.at({k, 0}) == doctest::Approx(mean));
    }
  }
  SUBCASE("step outputs") {
    Model model(small_config(Mode::kADP));
    FeatureMap f = extract_features(GrayImage(16, 20, 0.3), model.backbone());
    AttentionContext ctx = prepare_attention(f, *model.decoder());
    AttentionStep step = attention_step(ctx, initial_state(*model.decoder()), *model.decoder(), model.head(), 3);
    CHECK(step.alpha.shape() == Shape{1, f.height() * f.width()});
    CHECK(sum(step.alpha).item() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(step.logits.shape() == Shape{22, 1});
    CHECK(step.next.step == 1);
  }
  SUBCASE("decoding limit") {
    CHECK(max_decode_steps(4, 10) == 28);
  }
}

TEST_CASE("one attention step gradient") {
  Model model(small_config(Mode::kADP));
  std::mt19937_64 rng(8);
  GrayImage image(12, 16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& p : image.pixels) p = u(rng);
  std::vector<Tensor> params;
  for (const auto& e : model.parameters().entries()) params.push_back(e.tensor);
  const auto r = check_gradients(
      [&](auto) {
        FeatureMap f = extract_features(image, model.backbone());
        AttentionContext ctx = prepare_attention(f, *model.decoder());
        AttentionStep s = attention_step(ctx, initial_state(*model.decoder()), *model.decoder(), model.head(), 5);
        return scale(sum(slice(log_softmax(reshape(s.logits, Shape{22}), 0), 0, 5, 6)), -1.0);
      },
      params);
  CHECK(r.max_rel_error <= 1e-5);
}

TEST_CASE("classifier is shared between training and dense paths") {
  Model model(small_config(Mode::kExCTC));
  CHECK(model.head().weight.id() == model.parameters().get("head.weight").id());
  Model adp(small_config(Mode::kADP));
  CHECK(adp.head().weight.id() == adp.parameters().get("head.weight").id());
  CHECK(adp.squeeze() == nullptr);
  CHECK(model.decoder() == nullptr);
}

TEST_CASE("replica copies values into fresh storage") {
  Model model(small_config(Mode::kExCTC));
  Model copy = model.replica();
  const auto& a = model.parameters().entries();
  const auto& b = copy.parameters().entries();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tensor.id() != b[i].tensor.id());
    CHECK(std::equal(a[i].tensor.values().begin(), a[i].tensor.values().end(), b[i].tensor.values().begin()));
  }
}

TEST_CASE("mode names") {
  CHECK(parse_mode("ADP") == Mode::kADP);
  CHECK(parse_mode("ExCTC") == Mode::kExCTC);
  CHECK(to_string(Mode::kExCTC) == "ExCTC");
  CHECK_THROWS_AS(parse_mode("ctc"), InputError);
}

TEST_CASE("blank bias initialisation") {
  ModelConfig cfg = small_config(Mode::kADP);
  cfg.blank_bias = 4.0;
  const Model model(cfg);
  const auto bias = model.head().bias.values();
  CHECK(bias[0] == 4.0);
  CHECK(std::all_of(bias.begin() + 1, bias.end(), [](double b) { return b == 0.0; }));
}
