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
#include <string>
#include <vector>

#include "ifa/config.hpp"
#include "ifa/nn.hpp"

namespace ifa {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// One named tensor of a checkpoint file.
struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Wire format: "IFAK", u32 version, u32 entry count; per entry u16 name
/// length, name bytes, u8 rank, u32 dims, little-endian float64 values.
/// The file is written beside the target and renamed into place.
void write_checkpoint_file(const std::filesystem::path& path, const std::vector<CheckpointEntry>& entries);
/// Throws FormatError on bad magic, unsupported version or truncation.
std::vector<CheckpointEntry> read_checkpoint_file(const std::filesystem::path& path);

struct Checkpoint {
  TrainConfig config;
  /// Training resumes from the shuffle stream derive_seed(config.seed, epoch).
  int epoch = 0;
  std::vector<CheckpointEntry> parameters;
};

/// Parameters plus "meta.config" (config text as bytes) and "meta.epoch".
void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& config, int epoch);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// A model with the checkpoint's architecture and parameter values. Throws
/// FormatError when names or shapes disagree with the architecture.
Model restore_model(const Checkpoint& checkpoint);

}  // namespace ifa
