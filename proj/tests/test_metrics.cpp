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

#include <random>

#include "ifa/errors.hpp"
#include "ifa/metrics.hpp"
#include "oracles.hpp"

using namespace ifa;

TEST_CASE("cer") {
  CHECK(cer("abc", "abc") == 0.0);
  CHECK(cer("abd", "abc") == doctest::Approx(1.0 / 3.0));
  CHECK(cer("", "abc") == 1.0);
  CHECK(cer("a\nb", "ab") == 0.5);  // the line break is an ordinary symbol
  CHECK_THROWS_AS(cer("a", ""), MetricError);
}

TEST_CASE("ar and cr") {
  const auto perfect = ar_cr("abcd", "abcd");
  CHECK(perfect.ar == 1.0);
  CHECK(perfect.cr == 1.0);

  const auto ins = ar_cr("abxc", "abc");
  CHECK(ins.cr == 1.0);
  CHECK(ins.ar == doctest::Approx(2.0 / 3.0));

  const auto sub = ar_cr("abxd", "abcd");
  CHECK(sub.cr == 0.75);
  CHECK(sub.ar == 0.75);

  CHECK_THROWS_AS(ar_cr("a", ""), MetricError);
}

TEST_CASE("alignment counts match the edit distance oracle") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(0, 9), sym(0, 3);
  for (int trial = 0; trial < 500; ++trial) {
    std::string a, b;
    for (int i = len(rng); i > 0; --i) a.push_back(static_cast<char>('a' + sym(rng)));
    for (int i = len(rng) + 1; i > 0; --i) b.push_back(static_cast<char>('a' + sym(rng)));
    const EditCounts c = align(a, b);
    CHECK(c.distance() == oracle::edit_distance(a, b));
    CHECK(c.reference_length == static_cast<std::int64_t>(b.size()));
    // Aligned hypothesis length: matches + substitutions + insertions.
    CHECK(static_cast<std::int64_t>(b.size()) - c.deletions + c.insertions == static_cast<std::int64_t>(a.size()));
    const auto r = ar_cr(c);
    CHECK(r.cr >= r.ar);
    CHECK(cer(a, b) * static_cast<double>(b.size()) == doctest::Approx(static_cast<double>(c.distance())));
  }
}

TEST_CASE("counts accumulate") {
  EditCounts total = align("ab", "abc");
  total += align("x", "y");
  CHECK(total.deletions == 1);
  CHECK(total.substitutions == 1);
  CHECK(total.reference_length == 4);
}
