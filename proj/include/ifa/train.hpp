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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ifa/charset.hpp"
#include "ifa/config.hpp"
#include "ifa/image.hpp"
#include "ifa/losses.hpp"
#include "ifa/nn.hpp"

namespace ifa {

struct Sample {
  GrayImage image;
  std::string text;  // reading order; pages separate lines with '\n'
};

/// Loads every manifest entry of `split` in manifest order.
std::vector<Sample> load_split(const std::filesystem::path& data_dir, const std::string& split);

/// Alignment loss (CTC through the squeeze, or teacher-forced attention
/// cross-entropy) and, when requested, WH-ACE on the dense prediction.
LossParts forward_losses(const Model& model, const GrayImage& image, const LabelSequence& label,
                         const Charset& charset, bool use_wh_ace);

/// Charset matching the model's class count.
Charset charset_for(Mode mode);

/// Adam with bias correction.
class Adam {
 public:
  Adam(const ParameterSet& params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  /// Applies one update from `grads`, laid out as ParameterSet entries in order.
  void step(ParameterSet& params, const std::vector<double>& grads, double lr);

 private:
  double beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<double> m_, v_;
};

/// Cosine decay from base to base * final_fraction; step runs from 0 to
/// total_steps - 1 and the last step gets the final rate.
double cosine_lr(double base, double final_fraction, long long step, long long total_steps);

struct EpochStats {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double first_batch_loss = 0.0;
  int samples = 0;
  int skipped = 0;  // infeasible CTC labels
  double learning_rate = 0.0;
};

struct TrainResult {
  std::vector<double> batch_losses;  // mean loss per optimizer step
  std::vector<EpochStats> epochs;
};

/// Trains on the "train" split and writes config.checkpoint after every
/// epoch (when set). Per-sample gradients are summed in sample order, so the
/// result does not depend on config.threads. Throws DivergenceError on a
/// non-finite loss.
TrainResult train(const TrainConfig& config, const std::function<void(const EpochStats&)>& on_epoch = {});

/// Same, on an explicit model and sample set.
TrainResult train_model(Model& model, const std::vector<Sample>& samples, const TrainConfig& config,
                        const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace ifa
