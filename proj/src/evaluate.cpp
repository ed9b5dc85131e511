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

#include "ifa/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ifa/errors.hpp"

namespace ifa {

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kConventional:
      return "conventional";
    case EvalMode::kIfaLine:
      return "ifa-line";
    case EvalMode::kIfaFullpage:
      return "ifa-fullpage";
  }
  return "?";
}

EvalMode parse_eval_mode(std::string_view text) {
  for (EvalMode m : {EvalMode::kConventional, EvalMode::kIfaLine, EvalMode::kIfaFullpage}) {
    if (text == to_string(m)) return m;
  }
  throw InputError("unknown eval mode '" + std::string(text) + "'");
}

std::vector<EvalMode> parse_eval_modes(std::string_view text) {
  std::vector<EvalMode> modes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    const EvalMode m = parse_eval_mode(text.substr(start, comma - start));
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
    start = comma + 1;
  }
  std::sort(modes.begin(), modes.end());
  return modes;
}

EvalSets load_eval_sets(const std::filesystem::path& data_dir, const std::vector<EvalMode>& modes) {
  EvalSets sets;
  const auto wants = [&](EvalMode m) { return std::find(modes.begin(), modes.end(), m) != modes.end(); };
  if (wants(EvalMode::kConventional) || wants(EvalMode::kIfaLine)) sets.lines = load_split(data_dir, "eval-line");
  if (wants(EvalMode::kIfaFullpage)) sets.pages = load_split(data_dir, "eval-page");
  return sets;
}

namespace {

Invocations snapshot(const Model& m) {
  Invocations s;
  s.backbone = m.backbone().calls.count();
  s.classifier = m.head().calls.count();
  if (m.squeeze()) s.squeeze = m.squeeze()->calls.count();
  if (m.decoder()) s.decoder = m.decoder()->calls.count();
  return s;
}

Invocations since(const Invocations& a, const Invocations& b) {
  return {b.backbone - a.backbone, b.classifier - a.classifier, b.squeeze - a.squeeze, b.decoder - a.decoder};
}

ModeResult run_mode(const Model& model, EvalMode mode, const std::vector<Sample>& samples,
                    const DecodeParams& params, const Charset& charset, int threads) {
  if (samples.empty()) throw InputError("no samples for eval mode " + std::string(to_string(mode)));
  std::vector<std::string> hyps(samples.size());
  auto decode_one = [&](std::size_t i) {
    const GrayImage& image = samples[i].image;
    if (mode == EvalMode::kConventional) {
      hyps[i] = charset.decode(conventional_decode(model, image, charset));
    } else {
      hyps[i] = decode_page(image, model.backbone(), model.head(), params, charset).text;
    }
  };
  const Invocations before = snapshot(model);
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) decode_one(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < samples.size(); i += workers) decode_one(i);
      });
    }
  }

  ModeResult r;
  r.invocations = since(before, snapshot(model));
  for (std::size_t i = 0; i < samples.size(); ++i) r.counts += align(hyps[i], samples[i].text);
  r.samples = static_cast<int>(samples.size());
  if (r.counts.reference_length == 0) throw MetricError("empty references in eval set");
  r.cer = 100.0 * static_cast<double>(r.counts.distance()) / static_cast<double>(r.counts.reference_length);
  return r;
}

}  // namespace

EvalReport evaluate(const Model& model, const EvalSets& data, const std::vector<EvalMode>& modes,
                    const DecodeParams& params, int threads) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Charset charset = charset_for(model.config().mode);
  EvalReport report;
  report.model_mode = model.config().mode;
  for (EvalMode m : modes) {
    if (m == EvalMode::kConventional && !model.squeeze() && !model.decoder()) {
      throw InputError("conventional decoding needs a squeeze module or attention decoder");
    }
    const auto& samples = m == EvalMode::kIfaFullpage ? data.pages : data.lines;
    report.modes[m] = run_mode(model, m, samples, params, charset, threads);
  }

  const auto cer_of = [&](EvalMode m) -> std::optional<double> {
    auto it = report.modes.find(m);
    return it == report.modes.end() ? std::nullopt : std::optional<double>(it->second.cer);
  };
  const auto conv = cer_of(EvalMode::kConventional), line = cer_of(EvalMode::kIfaLine),
             page = cer_of(EvalMode::kIfaFullpage);
  if (conv && line) report.g1 = *conv - *line;
  if (line && page) report.g2 = *line - *page;
  if (page) {
    const AccuracyRates rates = ar_cr(report.modes[EvalMode::kIfaFullpage].counts);
    report.ar = 100.0 * rates.ar;
    report.cr = 100.0 * rates.cr;
  }
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string EvalReport::to_json(bool include_runtime) const {
  nlohmann::ordered_json j;
  j["model_mode"] = std::string(to_string(model_mode));
  nlohmann::ordered_json cer = nlohmann::ordered_json::object();
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
  for (const auto& [mode, r] : modes) {
    const std::string name(to_string(mode));
    cer[name] = r.cer;
    detail[name] = {
        {"samples", r.samples},
        {"reference_symbols", r.counts.reference_length},
        {"substitutions", r.counts.substitutions},
        {"deletions", r.counts.deletions},
        {"insertions", r.counts.insertions},
        {"invocations",
         {{"backbone", r.invocations.backbone},
          {"classifier", r.invocations.classifier},
          {"squeeze", r.invocations.squeeze},
          {"attention_decoder", r.invocations.decoder}}},
    };
  }
  j["cer_percent"] = cer;
  const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nullptr; };
  j["g1"] = opt(g1);
  j["g2"] = opt(g2);
  j["ar_percent"] = opt(ar);
  j["cr_percent"] = opt(cr);
  j["modes"] = detail;
  if (include_runtime) j["runtime_seconds"] = runtime_seconds;
  return j.dump(2) + "\n";
}

}  // namespace ifa
