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

#include "ifa/metrics.hpp"

#include <algorithm>
#include <vector>

#include "ifa/errors.hpp"

namespace ifa {

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  reference_length += o.reference_length;
  return *this;
}

EditCounts align(std::string_view hyp, std::string_view ref) {
  const std::size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: distance between ref[0..i) and hyp[0..j).
  std::vector<std::int64_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::int64_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<std::int64_t>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::int64_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditCounts counts;
  counts.reference_length = static_cast<std::int64_t>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++counts.substitutions;
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

double cer(std::string_view hypothesis, std::string_view reference) {
  if (reference.empty()) throw MetricError("CER is undefined for an empty reference");
  const EditCounts c = align(hypothesis, reference);
  return static_cast<double>(c.distance()) / static_cast<double>(c.reference_length);
}

AccuracyRates ar_cr(const EditCounts& c) {
  if (c.reference_length == 0) throw MetricError("AR/CR are undefined for an empty reference");
  const double n = static_cast<double>(c.reference_length);
  const double correct = n - static_cast<double>(c.deletions + c.substitutions);
  return AccuracyRates{(correct - static_cast<double>(c.insertions)) / n, correct / n};
}

AccuracyRates ar_cr(std::string_view hypothesis, std::string_view reference) {
  if (reference.empty()) throw MetricError("AR/CR are undefined for an empty reference");
  return ar_cr(align(hypothesis, reference));
}

}  // namespace ifa
