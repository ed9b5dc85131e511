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

#include "ifa/charset.hpp"

#include <algorithm>

#include "ifa/errors.hpp"

namespace ifa {

Charset::Charset(std::string characters, bool with_eos) : characters_(std::move(characters)) {
  if (characters_.empty()) throw InputError("charset needs at least one character");
  for (std::size_t i = 0; i < characters_.size(); ++i) {
    const char c = characters_[i];
    if (c == ' ' || c == '\n') throw InputError("space and newline cannot be charset classes");
    if (characters_.find(c, i + 1) != std::string::npos) {
      throw InputError(std::string("duplicate charset character '") + c + "'");
    }
  }
  if (with_eos) eos_ = static_cast<int>(characters_.size()) + 1;
}

const std::string& Charset::standard_characters() {
  static const std::string chars = "ABCDEFGHJKLMNPRSTUVX";
  return chars;
}

Charset Charset::standard(bool with_eos) { return Charset(standard_characters(), with_eos); }

int Charset::num_classes() const { return num_characters() + 1 + (eos_ ? 1 : 0); }

bool Charset::contains(char c) const { return characters_.find(c) != std::string::npos; }

int Charset::index_of(char c) const {
  const auto pos = characters_.find(c);
  if (pos == std::string::npos) throw InputError(std::string("unknown character '") + c + "'");
  return static_cast<int>(pos) + 1;
}

char Charset::symbol(int cls) const {
  if (!is_character(cls)) throw InputError("class " + std::to_string(cls) + " is not a character");
  return characters_[static_cast<std::size_t>(cls - 1)];
}

bool Charset::is_character(int cls) const { return cls >= 1 && cls <= num_characters(); }

LabelSequence Charset::encode(std::string_view text) const {
  LabelSequence label;
  for (char c : text) {
    if (c == ' ') continue;
    label.symbols.push_back(index_of(c));
  }
  return label;
}

std::string Charset::decode(const LabelSequence& label) const {
  std::string out;
  out.reserve(label.symbols.size());
  for (int s : label.symbols) out.push_back(symbol(s));
  return out;
}

}  // namespace ifa
