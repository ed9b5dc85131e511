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

#include <cmath>
#include <random>

#include "ifa/gradcheck.hpp"
#include "ifa/losses.hpp"
#include "ifa/ops.hpp"
#include "oracles.hpp"

using namespace ifa;

namespace {

std::vector<std::vector<double>> random_simplex_rows(std::mt19937_64& rng, std::size_t w, std::size_t k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<std::vector<double>> rows(w, std::vector<double>(k));
  for (auto& row : rows) {
    double total = 0.0;
    for (double& p : row) total += (p = u(rng));
    for (double& p : row) p /= total;
  }
  return rows;
}

Tensor log_tensor(const std::vector<std::vector<double>>& rows) {
  std::vector<double> v;
  for (const auto& row : rows)
    for (double p : row) v.push_back(std::log(p));
  return Tensor(Shape{static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size())}, v);
}

}  // namespace

TEST_CASE("extended label") {
  CtcExtendedLabel l(LabelSequence{{1, 1, 2}});
  CHECK(l.states == std::vector<int>{0, 1, 0, 1, 0, 2, 0});
  CHECK(l.can_skip == std::vector<bool>{false, false, false, false, false, true, false});
  CHECK(l.min_frames() == 4);
}

TEST_CASE("ctc small cases") {
  const double pa1 = 0.6, pb1 = 0.4, pa2 = 0.3, pb2 = 0.7;
  Tensor lp(Shape{2, 2}, {std::log(pb1), std::log(pa1), std::log(pb2), std::log(pa2)});  // [blank, a]
  SUBCASE("single frame") {
    Tensor one(Shape{1, 2}, {std::log(0.2), std::log(0.8)});
    CHECK(ctc_loss(one, LabelSequence{{1}}).item() == doctest::Approx(-std::log(0.8)).epsilon(1e-14));
  }
  SUBCASE("two frames, three paths") {
    const double p = pa1 * pa2 + pb1 * pa2 + pa1 * pb2;
    CHECK(ctc_loss(lp, LabelSequence{{1}}).item() == doctest::Approx(-std::log(p)).epsilon(1e-14));
  }
  SUBCASE("empty label is the all-blank path") {
    CHECK(ctc_loss(lp, LabelSequence{}).item() == doctest::Approx(-std::log(pb1 * pb2)).epsilon(1e-14));
  }
  SUBCASE("repeat needs a separating blank") {
    CHECK_THROWS_AS(ctc_loss(lp, LabelSequence{{1, 1}}), InfeasibleLabelError);
  }
}

TEST_CASE("ctc matches path enumeration") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<int> wd(1, 5), kd(2, 4), td(0, 3);
    const int w = wd(rng), k = kd(rng), t = td(rng);
    std::uniform_int_distribution<int> sym(1, k - 1);
    LabelSequence label;
    for (int i = 0; i < t; ++i) label.symbols.push_back(sym(rng));
    const auto rows = random_simplex_rows(rng, static_cast<std::size_t>(w), static_cast<std::size_t>(k));
    if (CtcExtendedLabel(label).min_frames() > static_cast<std::size_t>(w)) {
      CHECK_THROWS_AS(ctc_loss(log_tensor(rows), label), InfeasibleLabelError);
      continue;
    }
    CHECK(std::abs(ctc_loss(log_tensor(rows), label).item() - oracle::ctc_brute_force(rows, label.symbols)) <= 1e-9);
  }
}

TEST_CASE("ctc is equivariant under class relabelling") {
  std::mt19937_64 rng(5);
  const auto rows = random_simplex_rows(rng, 6, 4);
  const LabelSequence label{{1, 3, 3}};
  const std::vector<int> perm{0, 3, 1, 2};  // blank stays put
  std::vector<std::vector<double>> moved(rows.size(), std::vector<double>(4));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int c = 0; c < 4; ++c) moved[t][static_cast<std::size_t>(perm[c])] = rows[t][static_cast<std::size_t>(c)];
  LabelSequence relabelled;
  for (int s : label.symbols) relabelled.symbols.push_back(perm[static_cast<std::size_t>(s)]);
  CHECK(ctc_loss(log_tensor(rows), label).item() ==
        doctest::Approx(ctc_loss(log_tensor(moved), relabelled).item()).epsilon(1e-13));
}

TEST_CASE("ctc gradient") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(8 * 5);
  for (double& x : v) x = n(rng);
  const LabelSequence label{{2, 4, 4, 1}};
  const auto r = check_gradients([&](auto in) { return ctc_loss(log_softmax(in[0], 1), label); },
                                 {Tensor(Shape{8, 5}, v, true)});
  CHECK(r.max_rel_error <= 1e-6);
}

TEST_CASE("attention cross-entropy") {
  SUBCASE("uniform logits") {
    std::vector<Tensor> steps{Tensor(Shape{10, 1}, 0.0), Tensor(Shape{10, 1}, 0.0)};
    CHECK(attention_ce_loss(steps, LabelSequence{{3}}, 9).item() == doctest::Approx(2.0 * std::log(10.0)));
  }
  SUBCASE("saturated logits") {
    std::vector<double> a(10, 0.0), b(10, 0.0);
    a[3] = 100.0;
    b[9] = 100.0;
    std::vector<Tensor> steps{Tensor(Shape{10, 1}, a), Tensor(Shape{10, 1}, b)};
    const double loss = attention_ce_loss(steps, LabelSequence{{3}}, 9).item();
    CHECK(loss >= 0.0);
    CHECK(loss <= 1e-9);
  }
  SUBCASE("step count must be label length plus one") {
    std::vector<Tensor> steps{Tensor(Shape{10, 1}, 0.0)};
    CHECK_THROWS_AS(attention_ce_loss(steps, LabelSequence{{3}}, 9), InputError);
  }
}

TEST_CASE("hollow mask") {
  const Charset cs = Charset::standard(true);
  const auto h = hollow_mask(cs.encode("ABA"), cs);
  CHECK(h.size() == 22);
  CHECK(h[0] == 0.0);
  CHECK(h[1] == 0.0);
  CHECK(h[2] == 0.0);
  CHECK(h[3] == 1.0);
  CHECK(h[21] == 0.0);
}

TEST_CASE("wh-ace") {
  const Charset cs("abc", false);
  SUBCASE("hand example") {
    // Four pixels whose aggregated mass is y = [blank 1.0, a 2.0, b 0.5, c 0.5].
    Tensor probs(Shape{4, 1, 4}, {0.25, 0.25, 0.25, 0.25,  // blank
                                  0.5, 0.5, 0.5, 0.5,      // a
                                  0.25, 0.0, 0.25, 0.0,    // b
                                  0.0, 0.25, 0.0, 0.25});  // c
    DensePrediction pred{probs, probs};
    CHECK(wh_ace_loss(pred, cs.encode("a"), cs).item() == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("all mass in label or blank gives zero") {
    Tensor probs(Shape{4, 1, 2}, {0.5, 0.2, 0.5, 0.8, 0, 0, 0, 0});
    DensePrediction pred{probs, probs};
    CHECK(wh_ace_loss(pred, cs.encode("a"), cs).item() == 0.0);
  }
  SUBCASE("linear in out-label mass") {
    Tensor p1(Shape{4, 1, 1}, {0.7, 0.1, 0.1, 0.1});
    Tensor p2(Shape{4, 1, 1}, {0.5, 0.1, 0.2, 0.2});
    const double l1 = wh_ace_loss(DensePrediction{p1, p1}, cs.encode("a"), cs).item();
    const double l2 = wh_ace_loss(DensePrediction{p2, p2}, cs.encode("a"), cs).item();
    CHECK(l2 == doctest::Approx(2.0 * l1));
  }
}

TEST_CASE("combined loss") {
  Tensor a = Tensor::scalar(2.0), w = Tensor::scalar(0.25);
  CHECK(combined_loss(Mode::kExCTC, LossParts{Mode::kExCTC, a, w}, true).item() == 2.25);
  CHECK(combined_loss(Mode::kADP, LossParts{Mode::kADP, a, w}, true).item() == 2.25);
  CHECK(combined_loss(Mode::kExCTC, LossParts{Mode::kExCTC, a, Tensor()}, false).item() == 2.0);
  CHECK_THROWS_AS(combined_loss(Mode::kADP, LossParts{Mode::kExCTC, a, w}, true), InputError);
  CHECK_THROWS_AS(combined_loss(Mode::kExCTC, LossParts{Mode::kExCTC, a, Tensor()}, true), InputError);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(5 * 3 * 2);
  for (double& x : v) x = n(rng);
  const Charset cs("abcd", false);
  const LabelSequence label{{1, 2}};
  const auto r = check_gradients(
      [&](auto in) {
        Tensor seq = log_softmax(transpose(reshape(slice(in[0], 1, 0, 1), Shape{5, 2})), 1);
        LossParts parts{Mode::kExCTC, ctc_loss(seq, label), wh_ace_loss(DensePrediction{in[0], softmax(in[0], 0)}, label, cs)};
        return combined_loss(Mode::kExCTC, parts, true);
      },
      {Tensor(Shape{5, 3, 2}, v, true)});
  CHECK(r.max_rel_error <= 1e-6);
}
