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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ifa/ifa_decode.hpp"
#include "ifa/nn.hpp"
#include "ifa/synthdata.hpp"

namespace ifa {

/// Ordered key/value pairs from a `key = value` text file. Blank lines and
/// lines starting with '#' are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path);
/// Parses "key=value" (used for command-line overrides).
std::pair<std::string, std::string> split_assignment(const std::string& text);

struct TrainConfig {
  Mode mode = Mode::kExCTC;
  bool use_wh_ace = true;
  int wh_ace_start_epoch = 1;  // first epoch (1-based) that adds WH-ACE
  double learning_rate = 1e-3;
  /// Cosine decay from learning_rate to learning_rate * final_lr_fraction.
  double final_lr_fraction = 0.0;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
  int batch_size = 8;
  int epochs = 10;
  int max_train_samples = 0;  // 0 uses the whole train split
  int threads = 1;
  std::uint64_t seed = 42;
  std::filesystem::path data_dir;
  std::filesystem::path checkpoint;
  DecodeParams decode;
  ModelConfig model;

  void validate() const;
};

/// Applies one key; unknown keys throw InputError.
void apply_setting(TrainConfig& config, const std::string& key, const std::string& value);
void apply_setting(DatasetConfig& config, const std::string& key, const std::string& value);

/// File values first, then overrides in order. Relative paths in the file
/// resolve against the file's directory.
TrainConfig load_train_config(const std::filesystem::path& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {});
/// key = value text that load_train_config reads back to an equal config.
std::string format_train_config(const TrainConfig& config);
TrainConfig parse_train_config(const std::string& text);

DatasetConfig load_dataset_config(const std::filesystem::path& path,
                                  const std::vector<std::pair<std::string, std::string>>& overrides = {});

}  // namespace ifa
