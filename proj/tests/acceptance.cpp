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

// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "ifa/checkpoint.hpp"
#include "ifa/config.hpp"
#include "ifa/evaluate.hpp"
#include "ifa/gradcheck_suite.hpp"
#include "ifa/ifa_decode.hpp"
#include "ifa/losses.hpp"
#include "ifa/ops.hpp"
#include "ifa/synthdata.hpp"
#include "ifa/train.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ifa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. CTC against path enumeration.

Outcome ctc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int done = 0;
  while (done < 200) {
    const int w = std::uniform_int_distribution<int>(1, 6)(rng);
    const int k = std::uniform_int_distribution<int>(2, 4)(rng);
    const int t = std::uniform_int_distribution<int>(0, 3)(rng);
    LabelSequence label;
    for (int i = 0; i < t; ++i) label.symbols.push_back(std::uniform_int_distribution<int>(1, k - 1)(rng));
    if (CtcExtendedLabel(label).min_frames() > static_cast<std::size_t>(w)) continue;
    std::normal_distribution<double> n(0.0, 1.5);
    std::vector<double> logits(static_cast<std::size_t>(w * k));
    for (double& v : logits) v = n(rng);
    const Tensor logprobs = log_softmax(Tensor(Shape{w, k}, logits), 1);
    const Tensor probs = softmax(Tensor(Shape{w, k}, logits), 1);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(w));
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < k; ++j) rows[static_cast<std::size_t>(i)].push_back(probs.at({i, j}));
    const double dp = ctc_loss(logprobs, label).item();
    const double brute = oracle::ctc_brute_force(rows, label.symbols);
    worst = std::max(worst, std::abs(dp - brute));
    ++done;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          "200 instances, max |dp - brute| = " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Finite-difference gradient suite.

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto cases = run_gradient_suite();
  const double secs = seconds_since(t0);
  double worst = 0.0;
  std::string worst_name;
  bool ok = true;
  for (const auto& c : cases) {
    const bool good = c.result.max_rel_error <= 1e-5;
    if (!good) std::cout << "    gradient case " << c.name << " rel err " << c.result.max_rel_error << "\n";
    ok = ok && good;
    if (c.result.max_rel_error >= worst) {
      worst = c.result.max_rel_error;
      worst_name = c.name;
    }
  }
  return {ok && secs < 60.0, std::to_string(cases.size()) + " cases, max rel err " + fmt("%.3g", worst) + " (" +
                                 worst_name + "), " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------
// 3. WH-ACE closed form and hollow-mask invariance.

Outcome wh_ace_closed_form() {
  std::mt19937_64 rng(303);
  double worst_form = 0.0, worst_perturb = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool with_eos = trial % 2 == 1;
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const Charset cs(std::string("abcdefgh").substr(0, static_cast<std::size_t>(n)), with_eos);
    const Index k = cs.num_classes();
    const Index h = std::uniform_int_distribution<Index>(1, 5)(rng), w = std::uniform_int_distribution<Index>(1, 9)(rng);
    std::normal_distribution<double> nd(0.0, 2.0);
    std::vector<double> logits(static_cast<std::size_t>(k * h * w));
    for (double& v : logits) v = nd(rng);
    const Tensor lt(Shape{k, h, w}, logits);
    const Tensor probs = softmax(lt, 0);
    LabelSequence label;
    const int t = std::uniform_int_distribution<int>(0, 4)(rng);
    for (int i = 0; i < t; ++i) label.symbols.push_back(std::uniform_int_distribution<int>(1, n)(rng));

    const auto hollow = hollow_mask(label, cs);
    double expected = 0.0;
    for (Index c = 0; c < k; ++c) {
      double y = 0.0;
      for (Index i = 0; i < h; ++i)
        for (Index j = 0; j < w; ++j) y += probs.at({c, i, j});
      expected += hollow[static_cast<std::size_t>(c)] * y;
    }
    expected /= static_cast<double>(k);
    const double got = wh_ace_loss(DensePrediction{lt, probs}, label, cs).item();
    worst_form = std::max(worst_form, std::abs(got - expected) / std::max(1.0, std::abs(expected)));

    // Move mass between zero-weight classes at every pixel.
    std::vector<double> moved(probs.values().begin(), probs.values().end());
    std::vector<Index> zero_classes;
    for (Index c = 0; c < k; ++c)
      if (hollow[static_cast<std::size_t>(c)] == 0.0) zero_classes.push_back(c);
    if (zero_classes.size() >= 2) {
      for (Index i = 0; i < h * w; ++i) {
        const Index from = zero_classes[std::uniform_int_distribution<std::size_t>(0, zero_classes.size() - 1)(rng)];
        const Index to = zero_classes[std::uniform_int_distribution<std::size_t>(0, zero_classes.size() - 1)(rng)];
        const double share = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * moved[static_cast<std::size_t>(from * h * w + i)];
        moved[static_cast<std::size_t>(from * h * w + i)] -= share;
        moved[static_cast<std::size_t>(to * h * w + i)] += share;
      }
    }
    const Tensor mp(Shape{k, h, w}, moved);
    const double perturbed = wh_ace_loss(DensePrediction{lt, mp}, label, cs).item();
    worst_perturb = std::max(worst_perturb, std::abs(perturbed - got) / std::max(1.0, std::abs(got)));
  }
  const bool ok = worst_form <= 1e-12 && worst_perturb <= 1e-12;
  return {ok, "200 predictions, closed-form err " + fmt("%.3g", worst_form) + ", perturbation change " +
                  fmt("%.3g", worst_perturb)};
}

// ---------------------------------------------------------------------------
// 4. Line grouping on layouts that satisfy the grouping preconditions.

Outcome line_grouping() {
  const Charset cs("abcdefghjk", false);
  DecodeParams params;  // lambda_x = 20, lambda_y = 2
  const bool hand = postprocess_lines({{0, 0, cs.index_of('a'), 1}, {5, 0, cs.index_of('b'), 1},
                                       {0, 10, cs.index_of('c'), 1}},
                                      params, cs) == "ab\nc";
  std::mt19937_64 rng(404);
  int exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int lines = std::uniform_int_distribution<int>(1, 6)(rng);
    // Each line keeps its points within +-0.45 of its row; rows sit at least
    // lambda_y + 1 apart, so no cross-line pair is within lambda_y.
    std::vector<double> rows;
    double y = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    for (int l = 0; l < lines; ++l) {
      rows.push_back(y);
      y += params.lambda_y + 1.0 + std::uniform_real_distribution<double>(0.0, 8.0)(rng);
    }
    std::vector<CharDetection> dets;
    std::string truth;
    for (int l = 0; l < lines; ++l) {
      if (l) truth.push_back('\n');
      const int count = std::uniform_int_distribution<int>(1, 10)(rng);
      double x = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
      for (int i = 0; i < count; ++i) {
        if (i) x += std::uniform_real_distribution<double>(0.5, params.lambda_x - 0.5)(rng);
        const int cls = std::uniform_int_distribution<int>(1, cs.num_characters())(rng);
        dets.push_back({x, rows[static_cast<std::size_t>(l)] + std::uniform_real_distribution<double>(-0.45, 0.45)(rng),
                        cls, 1});
        truth.push_back(cs.symbol(cls));
      }
    }
    std::shuffle(dets.begin(), dets.end(), rng);
    exact += postprocess_lines(dets, params, cs) == truth;
  }
  return {hand && exact == 1000,
          "hand example " + std::string(hand ? "ok" : "wrong") + ", " + std::to_string(exact) + "/1000 layouts exact"};
}

// ---------------------------------------------------------------------------
// 5. Component merging against union-find.

Outcome component_oracle() {
  const Charset cs("abc", true);
  std::vector<bool> background(static_cast<std::size_t>(cs.num_classes()), false);
  background[0] = true;
  background[static_cast<std::size_t>(*cs.eos())] = true;
  std::mt19937_64 rng(505);
  int exact = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index h = std::uniform_int_distribution<Index>(1, 16)(rng), w = std::uniform_int_distribution<Index>(1, 64)(rng);
    const double density = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    ClassMap m{h, w, std::vector<int>(static_cast<std::size_t>(h * w), 0)};
    for (int& c : m.classes) {
      if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < density)
        c = std::uniform_int_distribution<int>(1, cs.num_classes() - 1)(rng);
    }
    const auto truth = oracle::components(m, background);
    const ComponentLabels labels = label_components(m, cs);
    const auto dets = merge_components(m, DecodeParams{}, cs);
    bool ok = oracle::groups_of(labels.labels) == truth && static_cast<std::size_t>(labels.count) == truth.size() &&
              dets.size() == truth.size();
    // Each detection is the centroid of one oracle component.
    auto key = [](int cls, Index support, double x, double y) {
      return std::tuple<int, Index, long long, long long>{cls, support, std::llround(x * 1e9), std::llround(y * 1e9)};
    };
    std::multiset<std::tuple<int, Index, long long, long long>> want, got;
    for (const auto& g : truth) {
      double sx = 0.0, sy = 0.0;
      for (std::size_t p : g) {
        sx += static_cast<double>(static_cast<Index>(p) % w);
        sy += static_cast<double>(static_cast<Index>(p) / w);
      }
      const auto n = static_cast<double>(g.size());
      want.insert(key(m.classes[g[0]], static_cast<Index>(g.size()), sx / n, sy / n));
    }
    for (const auto& d : dets) got.insert(key(d.cls, d.support, d.x, d.y));
    ok = ok && want == got;
    exact += ok;
  }
  return {exact == 1000, std::to_string(exact) + "/1000 maps with exact partition"};
}

// ---------------------------------------------------------------------------
// 6-8, 10. Trained models on the standard corpus.

struct Workspace {
  fs::path root;  // source tree (configs/)
  fs::path work;  // scratch output
  fs::path cli;
};

fs::path standard_corpus(const Workspace& ws) {
  const fs::path dir = ws.work / "data" / "standard";
  if (!fs::exists(dir / kManifestName)) {
    DatasetConfig cfg = load_dataset_config(ws.root / "configs" / "data_standard.conf");
    cfg.out_dir = dir;
    make_dataset(cfg);
  }
  return dir;
}

struct Trained {
  Model model;
  TrainConfig config;
  double train_seconds = 0.0;
  bool reused = false;
};

// Trains from a config file, or reuses a checkpoint written from the same
// config text (training is deterministic).
Trained train_from(const Workspace& ws, const std::string& config_name, const std::string& tag,
                   const std::vector<std::pair<std::string, std::string>>& overrides) {
  TrainConfig cfg = load_train_config(ws.root / "configs" / config_name, overrides);
  cfg.data_dir = standard_corpus(ws);
  cfg.checkpoint = ws.work / "runs" / (tag + ".ifak");
  fs::create_directories(cfg.checkpoint.parent_path());
  if (fs::exists(cfg.checkpoint)) {
    try {
      Checkpoint ck = load_checkpoint(cfg.checkpoint);
      if (format_train_config(ck.config) == format_train_config(cfg) && ck.epoch == cfg.epochs) {
        return {restore_model(ck), cfg, 0.0, true};
      }
    } catch (const std::exception&) {
    }
  }
  std::cout << "    training " << tag << " (" << cfg.epochs << " epochs)" << std::endl;
  const auto t0 = Clock::now();
  train(cfg, [&](const EpochStats& s) {
    std::cout << "      epoch " << s.epoch << " loss " << s.mean_loss << std::endl;
  });
  const double secs = seconds_since(t0);
  return {restore_model(load_checkpoint(cfg.checkpoint)), cfg, secs, false};
}

EvalReport evaluate_all(const Workspace& ws, const Trained& t) {
  const auto modes = parse_eval_modes("conventional,ifa-line,ifa-fullpage");
  return evaluate(t.model, load_eval_sets(standard_corpus(ws), modes), modes, t.config.decode);
}

double cer_of(const EvalReport& r, EvalMode m) { return r.modes.at(m).cer; }

std::string cers(const EvalReport& r) {
  return "conv " + fmt("%.2f", cer_of(r, EvalMode::kConventional)) + "%, line " +
         fmt("%.2f", cer_of(r, EvalMode::kIfaLine)) + "%, page " + fmt("%.2f", cer_of(r, EvalMode::kIfaFullpage)) +
         "%";
}

bool structural_only(const EvalReport& r) {
  bool ok = true;
  for (EvalMode m : {EvalMode::kIfaLine, EvalMode::kIfaFullpage}) {
    const Invocations& inv = r.modes.at(m).invocations;
    const auto samples = static_cast<std::uint64_t>(r.modes.at(m).samples);
    ok = ok && inv.squeeze == 0 && inv.decoder == 0 && inv.backbone == samples && inv.classifier == samples;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 9. CLI determinism.

int run(const std::string& command) {
  std::cout << "    $ " << command << std::endl;
  return std::system((command + " > /dev/null").c_str());
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome cli_determinism(const Workspace& ws) {
  const fs::path dir = ws.work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = quoted(ws.cli);
  const fs::path data = dir / "data";
  bool ok = run(cli + " gen-data --config " + quoted(ws.root / "configs" / "data_tiny.conf") + " --out " +
                quoted(data)) == 0;
  for (const char* arm : {"a", "b"}) {
    const fs::path ck = dir / (std::string(arm) + ".ifak");
    ok = ok && run(cli + " train --config " + quoted(ws.root / "configs" / "tiny.conf") + " --set data=" +
                   quoted(data) + " --set checkpoint=" + quoted(ck)) == 0;
    ok = ok && run(cli + " eval --ckpt " + quoted(ck) + " --data " + quoted(data) + " --out " +
                   quoted(dir / (std::string(arm) + ".json"))) == 0;
  }
  if (!ok) return {false, "a CLI step failed"};
  const std::string ra = read_bytes(dir / "a.json"), rb = read_bytes(dir / "b.json");
  const bool reports = !ra.empty() && ra == rb;
  // The files differ only in the embedded checkpoint path.
  const Checkpoint ca = load_checkpoint(dir / "a.ifak"), cb = load_checkpoint(dir / "b.ifak");
  bool checkpoints = ca.parameters.size() == cb.parameters.size() && ca.epoch == cb.epoch;
  for (std::size_t i = 0; checkpoints && i < ca.parameters.size(); ++i) {
    const auto &pa = ca.parameters[i], &pb = cb.parameters[i];
    checkpoints = pa.name == pb.name && pa.shape == pb.shape && pa.values.size() == pb.values.size() &&
                  std::memcmp(pa.values.data(), pb.values.data(), pa.values.size() * sizeof(double)) == 0;
  }

  // Load, restore, save: the file must come back unchanged.
  save_checkpoint(dir / "again.ifak", restore_model(ca), ca.config, ca.epoch);
  const bool round_trip = read_bytes(dir / "a.ifak") == read_bytes(dir / "again.ifak");
  return {reports && checkpoints && round_trip,
          std::string("reports ") + (reports ? "identical" : "differ") + ", checkpoint " +
              (checkpoints ? "parameters identical" : "parameters differ") + ", round trip " + (round_trip ? "bit-exact" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Workspace ws;
  std::string only;
  app.add_option("--root", ws.root, "Source tree holding configs/")->required();
  app.add_option("--work", ws.work, "Scratch directory for corpora and checkpoints")->required();
  app.add_option("--cli", ws.cli, "Path to the ifa executable")->required();
  app.add_option("--only", only, "Comma-separated criterion numbers");
  CLI11_PARSE(app, argc, argv);

  std::set<int> wanted;
  {
    std::stringstream ss(only);
    std::string item;
    while (std::getline(ss, item, ',')) wanted.insert(std::stoi(item));
  }
  auto selected = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };

  int failures = 0;
  auto report = [&](int n, const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << n << "] " << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  };
  auto guarded = [&](int n, const std::string& name, const std::function<Outcome()>& fn) {
    if (!selected(n)) return;
    try {
      report(n, name, fn());
    } catch (const std::exception& e) {
      report(n, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "ctc oracle", ctc_oracle);
  guarded(2, "gradient suite", gradient_suite);
  guarded(3, "wh-ace closed form", wh_ace_closed_form);
  guarded(4, "line grouping", line_grouping);
  guarded(5, "component merging", component_oracle);

  const bool need_models = selected(6) || selected(7) || selected(8) || selected(10);
  std::optional<EvalReport> with, without, adp;
  double exctc_seconds = 0.0;
  bool exctc_reused = false;
  if (need_models) {
    try {
      const auto t0 = Clock::now();
      const Trained t = train_from(ws, "exctc.conf", "exctc", {});
      with = evaluate_all(ws, t);
      exctc_seconds = seconds_since(t0);
      exctc_reused = t.reused;
      std::cout << "    exctc+wh-ace: " << cers(*with) << std::endl;
      if (selected(7)) {
        without = evaluate_all(ws, train_from(ws, "exctc.conf", "exctc_nowhace", {{"use_wh_ace", "false"}}));
        std::cout << "    exctc alone:  " << cers(*without) << std::endl;
      }
      if (selected(8) || selected(10)) {
        adp = evaluate_all(ws, train_from(ws, "adp.conf", "adp", {}));
        std::cout << "    adp+wh-ace:   " << cers(*adp) << std::endl;
      }
    } catch (const std::exception& e) {
      std::cout << "    training failed: " << e.what() << std::endl;
    }
  }

  guarded(6, "exctc conversion", [&]() -> Outcome {
    if (!with) return {false, "no model"};
    const double conv = cer_of(*with, EvalMode::kConventional);
    const bool ok = conv <= 5.0 && std::abs(*with->g1) <= 2.0 && std::abs(*with->g2) <= 2.0 &&
                    (exctc_reused || exctc_seconds <= 30.0 * 60.0);
    return {ok, cers(*with) + ", g1 " + fmt("%.2f", *with->g1) + ", g2 " + fmt("%.2f", *with->g2) + ", " +
                    (exctc_reused ? std::string("cached checkpoint") : fmt("%.0f s train+eval", exctc_seconds))};
  });
  guarded(7, "wh-ace ablation", [&]() -> Outcome {
    if (!with || !without) return {false, "no model"};
    const double line_with = cer_of(*with, EvalMode::kIfaLine), line_without = cer_of(*without, EvalMode::kIfaLine);
    const double ratio = line_with > 0.0 ? line_without / line_with : (line_without > 0.0 ? INFINITY : 1.0);
    const double conv_diff =
        std::abs(cer_of(*with, EvalMode::kConventional) - cer_of(*without, EvalMode::kConventional));
    return {ratio >= 1.5 && conv_diff <= 2.0,
            "ifa-line " + fmt("%.2f", line_without) + "% without vs " + fmt("%.2f", line_with) + "% with (ratio " +
                fmt("%.2f", ratio) + "), conventional diff " + fmt("%.2f", conv_diff)};
  });
  guarded(8, "adp conversion", [&]() -> Outcome {
    if (!adp) return {false, "no model"};
    const double line = cer_of(*adp, EvalMode::kIfaLine), conv = cer_of(*adp, EvalMode::kConventional);
    return {line <= conv + 2.0, "ifa-line " + fmt("%.2f", line) + "% vs conventional " + fmt("%.2f", conv) + "%"};
  });
  guarded(9, "cli determinism", [&] { return cli_determinism(ws); });
  guarded(10, "ifa inference uses backbone and classifier only", [&]() -> Outcome {
    if (!with || !adp) return {false, "no model"};
    const bool ok = structural_only(*with) && structural_only(*adp) &&
                    with->modes.at(EvalMode::kConventional).invocations.squeeze > 0 &&
                    adp->modes.at(EvalMode::kConventional).invocations.decoder > 0;
    return {ok, "squeeze/decoder calls in ifa modes: exctc " +
                    std::to_string(with->modes.at(EvalMode::kIfaLine).invocations.squeeze +
                                   with->modes.at(EvalMode::kIfaFullpage).invocations.squeeze) +
                    ", adp " +
                    std::to_string(adp->modes.at(EvalMode::kIfaLine).invocations.decoder +
                                   adp->modes.at(EvalMode::kIfaFullpage).invocations.decoder)};
  });

  return failures == 0 ? 0 : 1;
}
