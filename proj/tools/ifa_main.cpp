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

// Command-line front end: data generation, training, evaluation, decoding
// and the gradient check.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "ifa/checkpoint.hpp"
#include "ifa/config.hpp"
#include "ifa/errors.hpp"
#include "ifa/evaluate.hpp"
#include "ifa/gradcheck_suite.hpp"
#include "ifa/ifa_decode.hpp"
#include "ifa/synthdata.hpp"
#include "ifa/train.hpp"

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

Overrides parse_overrides(const std::vector<std::string>& sets) {
  Overrides out;
  for (const auto& s : sets) out.push_back(ifa::split_assignment(s));
  return out;
}

void apply_decode_flags(ifa::DecodeParams& p, const std::optional<double>& lx, const std::optional<double>& ly,
                        bool downscale) {
  if (lx) p.lambda_x = *lx;
  if (ly) p.lambda_y = *ly;
  if (downscale) p.downscale_input = true;
  p.validate();
}

int gen_data(const std::string& config, const std::vector<std::string>& sets, const std::string& out) {
  Overrides o = parse_overrides(sets);
  if (!out.empty()) o.emplace_back("out", out);
  const auto cfg = ifa::load_dataset_config(config, o);
  const auto entries = ifa::make_dataset(cfg);
  std::cout << "wrote " << entries.size() << " samples to " << cfg.out_dir.string() << "\n";
  return 0;
}

int train(const std::string& config, const std::vector<std::string>& sets) {
  const auto cfg = ifa::load_train_config(config, parse_overrides(sets));
  if (cfg.checkpoint.empty()) throw ifa::InputError("training needs a checkpoint path");
  std::cout << "epoch\tmean_loss\tfirst_batch_loss\tsamples\tskipped\tlr\n";
  const auto result = ifa::train(cfg, [](const ifa::EpochStats& s) {
    std::cout << s.epoch << '\t' << std::setprecision(10) << s.mean_loss << '\t' << s.first_batch_loss << '\t'
              << s.samples << '\t' << s.skipped << '\t' << s.learning_rate << std::endl;
  });
  std::cout << "checkpoint " << cfg.checkpoint.string() << " (" << result.batch_losses.size() << " steps)\n";
  return 0;
}

int eval(const std::string& ckpt, const std::string& data, const std::string& modes, const std::string& out,
         int threads, const std::optional<double>& lx, const std::optional<double>& ly, bool downscale) {
  const auto checkpoint = ifa::load_checkpoint(ckpt);
  const ifa::Model model = ifa::restore_model(checkpoint);
  ifa::DecodeParams params = checkpoint.config.decode;
  apply_decode_flags(params, lx, ly, downscale);
  const auto mode_list = ifa::parse_eval_modes(modes);
  const auto sets = ifa::load_eval_sets(data, mode_list);
  const auto report = ifa::evaluate(model, sets, mode_list, params, threads);
  std::cout << report.to_json(true);
  if (!out.empty()) {
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    os << report.to_json(false);
    if (!os) throw ifa::InputError("cannot write report " + out);
  }
  return 0;
}

int decode(const std::string& ckpt, const std::string& image_path, bool dump, const std::optional<double>& lx,
           const std::optional<double>& ly, bool downscale) {
  const auto checkpoint = ifa::load_checkpoint(ckpt);
  const ifa::Model model = ifa::restore_model(checkpoint);
  ifa::DecodeParams params = checkpoint.config.decode;
  apply_decode_flags(params, lx, ly, downscale);
  const ifa::Charset charset = ifa::charset_for(model.config().mode);
  const auto page = ifa::decode_page(ifa::read_pgm(image_path), model.backbone(), model.head(), params, charset);
  std::cout << page.text << "\n";
  if (dump) ifa::write_detections(std::cout, page.detections, charset);
  return 0;
}

int gradcheck(std::uint64_t seed, double tolerance) {
  bool ok = true;
  for (const auto& c : ifa::run_gradient_suite(seed)) {
    const bool pass = c.result.max_rel_error <= tolerance;
    ok = ok && pass;
    std::printf("%-24s %s  max_rel=%.3e  max_abs=%.3e  coords=%zu\n", c.name.c_str(), pass ? "PASS" : "FAIL",
                c.result.max_rel_error, c.result.max_abs_error, c.result.checked);
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line recognizer training and decoder-free page reading"};
  app.require_subcommand(1);

  std::string config, out, ckpt, data, modes = "conventional,ifa-line,ifa-fullpage", image;
  std::vector<std::string> sets;
  std::optional<double> lambda_x, lambda_y;
  bool dump = false, downscale = false;
  int threads = 1;
  std::uint64_t seed = 7;
  double tolerance = 1e-5;

  auto* gen = app.add_subcommand("gen-data", "Render the synthetic corpus");
  gen->add_option("--config", config, "Dataset config file")->required();
  gen->add_option("--set", sets, "Override a config key (key=value)");
  gen->add_option("--out", out, "Output directory (overrides 'out')");

  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--config", config, "Training config file")->required();
  tr->add_option("--set", sets, "Override a config key (key=value)");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--ckpt", ckpt, "Checkpoint")->required();
  ev->add_option("--data", data, "Dataset directory")->required();
  ev->add_option("--modes", modes, "conventional,ifa-line,ifa-fullpage");
  ev->add_option("--out", out, "Report file (JSON, without runtime)");
  ev->add_option("--threads", threads, "Decoding threads")->check(CLI::PositiveNumber);

  auto* de = app.add_subcommand("decode", "Read one image with IFA inference");
  de->add_option("--ckpt", ckpt, "Checkpoint")->required();
  de->add_option("--image", image, "PGM image")->required();
  de->add_flag("--dump-detections", dump, "Print merged detections");

  for (auto* sub : {ev, de}) {
    sub->add_option("--lambda-x", lambda_x, "Horizontal linking threshold (feature cells)");
    sub->add_option("--lambda-y", lambda_y, "Vertical linking threshold (feature cells)");
    sub->add_flag("--downscale", downscale, "Halve the input resolution first");
  }

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gc->add_option("--seed", seed, "Random seed");
  gc->add_option("--tolerance", tolerance, "Maximum relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return gen_data(config, sets, out);
    if (*tr) return train(config, sets);
    if (*ev) return eval(ckpt, data, modes, out, threads, lambda_x, lambda_y, downscale);
    if (*de) return decode(ckpt, image, dump, lambda_x, lambda_y, downscale);
    if (*gc) return gradcheck(seed, tolerance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
