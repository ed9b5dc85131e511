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

#include "ifa/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "ifa/checkpoint.hpp"
#include "ifa/errors.hpp"
#include "ifa/ops.hpp"
#include "ifa/synthdata.hpp"

namespace ifa {

std::vector<Sample> load_split(const std::filesystem::path& data_dir, const std::string& split) {
  std::vector<Sample> out;
  for (const auto& e : read_manifest(data_dir / kManifestName)) {
    if (e.split == split) out.push_back({read_pgm(data_dir / e.path), e.label});
  }
  if (out.empty()) throw InputError("split '" + split + "' is empty in " + data_dir.string());
  return out;
}

Charset charset_for(Mode mode) { return Charset::standard(mode == Mode::kADP); }

LossParts forward_losses(const Model& model, const GrayImage& image, const LabelSequence& label,
                         const Charset& charset, bool use_wh_ace) {
  if (charset.num_classes() != model.head().num_classes()) throw InputError("charset and model disagree on K");
  LossParts parts;
  parts.mode = model.config().mode;
  FeatureMap features = extract_features(image, model.backbone());

  if (parts.mode == Mode::kExCTC) {
    Tensor logits = model.head().apply(column_squeeze(features, *model.squeeze()).sequence);  // [K, W]
    parts.alignment = ctc_loss(log_softmax(transpose(logits), 1), label, charset.blank());
  } else {
    const AttentionDecoder& decoder = *model.decoder();
    AttentionContext ctx = prepare_attention(features, decoder);
    AttentionState state = initial_state(decoder);
    std::vector<Tensor> logits;
    for (std::size_t t = 0; t <= label.length(); ++t) {
      const int target = t < label.length() ? label.symbols[t] : *charset.eos();
      AttentionStep step = attention_step(ctx, state, decoder, model.head(), target);
      logits.push_back(step.logits);
      state = std::move(step.next);
    }
    parts.alignment = attention_ce_loss(logits, label, *charset.eos());
  }
  if (use_wh_ace) parts.wh_ace = wh_ace_loss(classify_dense(features, model.head()), label, charset);
  return parts;
}

Adam::Adam(const ParameterSet& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  const auto n = static_cast<std::size_t>(params.total_size());
  m_.assign(n, 0.0);
  v_.assign(n, 0.0);
}

void Adam::step(ParameterSet& params, const std::vector<double>& grads, double lr) {
  if (grads.size() != m_.size()) throw DimensionError("Adam: gradient size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t k = 0;
  for (const auto& e : params.entries()) {
    Tensor p = e.tensor;
    for (double& w : p.mutable_values()) {
      const double g = grads[k];
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g * g;
      w -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
      ++k;
    }
  }
}

double cosine_lr(double base, double final_fraction, long long step, long long total_steps) {
  if (total_steps <= 1) return base;
  const double progress = std::clamp(static_cast<double>(step) / static_cast<double>(total_steps - 1), 0.0, 1.0);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return base * (final_fraction + (1.0 - final_fraction) * cosine);
}

namespace {

struct Prepared {
  const GrayImage* image;
  LabelSequence label;
};

struct SampleResult {
  bool skipped = false;
  double loss = 0.0;
  std::vector<double> grad;
};

void run_sample(Model& model, const Prepared& s, const Charset& charset, bool use_wh_ace, SampleResult& out) {
  model.parameters().zero_grad();
  Tensor loss;
  try {
    loss = combined_loss(model.config().mode, forward_losses(model, *s.image, s.label, charset, use_wh_ace),
                         use_wh_ace);
  } catch (const InfeasibleLabelError&) {
    out.skipped = true;
    return;
  }
  out.skipped = false;
  out.loss = loss.item();
  if (!std::isfinite(out.loss)) return;
  backward(loss);
  out.grad.clear();
  for (const auto& e : model.parameters().entries()) {
    const auto g = e.tensor.grad();
    if (g.empty()) {
      out.grad.insert(out.grad.end(), static_cast<std::size_t>(e.tensor.size()), 0.0);
    } else {
      out.grad.insert(out.grad.end(), g.begin(), g.end());
    }
  }
}

void keep_heap_mapped() {
#ifdef __GLIBC__
  // Every step reallocates the same large graph buffers; returning them to
  // the kernel in between costs more than the arithmetic.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
}

}  // namespace

TrainResult train_model(Model& model, const std::vector<Sample>& samples, const TrainConfig& config,
                        const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  keep_heap_mapped();
  if (model.config().mode != config.mode) throw InputError("model mode differs from the training config");
  const Charset charset = charset_for(config.mode);

  std::vector<Prepared> data;
  const std::size_t limit = config.max_train_samples > 0
                                ? std::min(samples.size(), static_cast<std::size_t>(config.max_train_samples))
                                : samples.size();
  for (std::size_t i = 0; i < limit; ++i) data.push_back({&samples[i].image, charset.encode(samples[i].text)});
  if (data.empty()) throw InputError("no training samples");

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const long long steps_per_epoch = static_cast<long long>((data.size() + batch - 1) / batch);
  const long long total_steps = steps_per_epoch * config.epochs;
  const auto workers = static_cast<std::size_t>(config.threads);

  std::vector<Model> replicas;
  for (std::size_t w = 0; w < workers; ++w) replicas.push_back(model.replica());

  Adam adam(model.parameters());
  TrainResult result;
  std::vector<std::size_t> order(data.size());
  std::vector<SampleResult> per_sample(batch);
  std::vector<double> grad(static_cast<std::size_t>(model.parameters().total_size()));
  long long global_step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    const bool wh_ace = config.use_wh_ace && epoch >= config.wh_ace_start_epoch;
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch, ++global_step) {
      const std::size_t count = std::min(batch, order.size() - begin);
      for (auto& r : replicas) r.parameters().copy_values_from(model.parameters());

      auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < count; i += workers) {
          run_sample(replicas[w], data[order[begin + i]], charset, wh_ace, per_sample[i]);
        }
      };
      if (workers == 1) {
        work(0);
      } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
      }

      std::fill(grad.begin(), grad.end(), 0.0);
      int used = 0;
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const SampleResult& r = per_sample[i];
        if (r.skipped) {
          ++stats.skipped;
          continue;
        }
        if (!std::isfinite(r.loss)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                std::to_string(global_step));
        }
        ++used;
        batch_loss += r.loss;
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += r.grad[k];
      }
      if (used == 0) continue;
      const double inv = 1.0 / used;
      for (double& g : grad) g *= inv;
      if (config.grad_clip > 0.0) {
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm > config.grad_clip) {
          for (double& g : grad) g *= config.grad_clip / norm;
        }
      }
      const double lr = cosine_lr(config.learning_rate, config.final_lr_fraction, global_step, total_steps);
      adam.step(model.parameters(), grad, lr);

      batch_loss *= inv;
      if (stats.samples == 0) stats.first_batch_loss = batch_loss;
      result.batch_losses.push_back(batch_loss);
      loss_sum += batch_loss * used;
      stats.samples += used;
      stats.learning_rate = lr;
    }
    stats.mean_loss = stats.samples > 0 ? loss_sum / stats.samples : 0.0;
    result.epochs.push_back(stats);
    if (!config.checkpoint.empty()) save_checkpoint(config.checkpoint, model, config, epoch);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

TrainResult train(const TrainConfig& config, const std::function<void(const EpochStats&)>& on_epoch) {
  if (config.data_dir.empty()) throw InputError("training needs a data directory");
  const auto samples = load_split(config.data_dir, "train");
  Model model(config.model);
  return train_model(model, samples, config, on_epoch);
}

}  // namespace ifa
