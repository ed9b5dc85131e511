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
#include <string>
#include <string_view>
#include <vector>

namespace ifa {

/// Transcript as class indices: no blank, no EOS, no spaces.
struct LabelSequence {
  std::vector<int> symbols;

  std::size_t length() const { return symbols.size(); }
  bool operator==(const LabelSequence&) const = default;
};

/// Class layout: 0 is blank, 1..n are the characters in order, n+1 is EOS
/// when the charset carries one.
class Charset {
 public:
  static constexpr int kBlank = 0;

  Charset(std::string characters, bool with_eos);

  /// The 20-letter corpus alphabet.
  static Charset standard(bool with_eos);
  static const std::string& standard_characters();

  int blank() const { return kBlank; }
  std::optional<int> eos() const { return eos_; }
  bool has_eos() const { return eos_.has_value(); }
  int num_classes() const;
  int num_characters() const { return static_cast<int>(characters_.size()); }
  const std::string& characters() const { return characters_; }

  bool contains(char c) const;
  int index_of(char c) const;
  char symbol(int cls) const;
  bool is_character(int cls) const;

  /// Spaces are geometry only and are dropped; any other unknown
  /// character throws InputError.
  LabelSequence encode(std::string_view text) const;
  std::string decode(const LabelSequence& label) const;

 private:
  std::string characters_;
  std::optional<int> eos_;
};

}  // namespace ifa
