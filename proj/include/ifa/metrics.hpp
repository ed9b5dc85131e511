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
#include <string_view>

namespace ifa {

/// Operation counts of one minimal-cost (unit cost) edit alignment of a
/// hypothesis against a reference. Among equally cheap alignments the
/// backtrace prefers match/substitution, then deletion, then insertion.
struct EditCounts {
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;   // reference symbols missing from the hypothesis
  std::int64_t insertions = 0;  // extra hypothesis symbols
  std::int64_t reference_length = 0;

  std::int64_t distance() const { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& o);
};

EditCounts align(std::string_view hypothesis, std::string_view reference);

/// Edit distance / reference length. Throws MetricError on an empty reference.
double cer(std::string_view hypothesis, std::string_view reference);

struct AccuracyRates {
  double ar = 0.0;  // (N - D - S - I) / N
  double cr = 0.0;  // (N - D - S) / N
};

AccuracyRates ar_cr(std::string_view hypothesis, std::string_view reference);
AccuracyRates ar_cr(const EditCounts& counts);

}  // namespace ifa
