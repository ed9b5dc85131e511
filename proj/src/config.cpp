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

#include "ifa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ifa/charset.hpp"
#include "ifa/errors.hpp"

namespace ifa {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InputError("bad value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw InputError("bad boolean '" + value + "' for " + key);
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  if (out.empty()) throw InputError("empty list for " + key);
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config " + path.string());
  KeyValues out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw InputError("expected key=value, got '" + text + "'");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (final_lr_fraction < 0.0 || final_lr_fraction > 1.0) throw InputError("final_lr_fraction must lie in [0, 1]");
  if (grad_clip < 0.0) throw InputError("grad_clip must be non-negative");
  if (batch_size < 1 || epochs < 1 || threads < 1) throw InputError("batch_size, epochs and threads must be >= 1");
  if (max_train_samples < 0) throw InputError("max_train_samples must be non-negative");
  if (wh_ace_start_epoch < 1) throw InputError("wh_ace_start_epoch must be >= 1");
  decode.validate();
}

void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "mode") {
    c.mode = parse_mode(value);
    c.model.mode = c.mode;
    c.model.num_classes = Charset::standard(c.mode == Mode::kADP).num_classes();
  } else if (key == "use_wh_ace") {
    c.use_wh_ace = parse_bool(key, value);
  } else if (key == "wh_ace_start_epoch") {
    c.wh_ace_start_epoch = parse_number<int>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "final_lr_fraction") {
    c.final_lr_fraction = parse_number<double>(key, value);
  } else if (key == "grad_clip") {
    c.grad_clip = parse_number<double>(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_number<int>(key, value);
  } else if (key == "epochs") {
    c.epochs = parse_number<int>(key, value);
  } else if (key == "max_train_samples") {
    c.max_train_samples = parse_number<int>(key, value);
  } else if (key == "threads") {
    c.threads = parse_number<int>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "data") {
    c.data_dir = value;
  } else if (key == "checkpoint") {
    c.checkpoint = value;
  } else if (key == "lambda_x") {
    c.decode.lambda_x = parse_number<double>(key, value);
  } else if (key == "lambda_y") {
    c.decode.lambda_y = parse_number<double>(key, value);
  } else if (key == "min_support") {
    c.decode.min_support = parse_number<Index>(key, value);
  } else if (key == "downscale_input") {
    c.decode.downscale_input = parse_bool(key, value);
  } else if (key == "channels") {
    c.model.channels = parse_int_list(key, value);
  } else if (key == "strides") {
    c.model.strides = parse_int_list(key, value);
  } else if (key == "squeeze_channels") {
    c.model.squeeze_channels = parse_number<int>(key, value);
  } else if (key == "attention_size") {
    c.model.attention_size = parse_number<int>(key, value);
  } else if (key == "hidden_size") {
    c.model.hidden_size = parse_number<int>(key, value);
  } else if (key == "embedding_size") {
    c.model.embedding_size = parse_number<int>(key, value);
  } else if (key == "position_size") {
    c.model.position_size = parse_number<int>(key, value);
  } else if (key == "blank_bias") {
    c.model.blank_bias = parse_number<double>(key, value);
  } else if (key == "model_seed") {
    c.model.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw InputError("unknown training setting '" + key + "'");
  }
}

void apply_setting(DatasetConfig& c, const std::string& key, const std::string& value) {
  if (key == "out") {
    c.out_dir = value;
  } else if (key == "train_lines") {
    c.train_lines = parse_number<int>(key, value);
  } else if (key == "eval_lines") {
    c.eval_lines = parse_number<int>(key, value);
  } else if (key == "eval_pages") {
    c.eval_pages = parse_number<int>(key, value);
  } else if (key == "min_length") {
    c.min_length = parse_number<int>(key, value);
  } else if (key == "max_length") {
    c.max_length = parse_number<int>(key, value);
  } else if (key == "page_min_lines") {
    c.page_min_lines = parse_number<int>(key, value);
  } else if (key == "page_max_lines") {
    c.page_max_lines = parse_number<int>(key, value);
  } else if (key == "space_prob") {
    c.space_prob = parse_number<double>(key, value);
  } else if (key == "font_scale") {
    c.font_scale = parse_number<int>(key, value);
  } else if (key == "glyph_pitch") {
    c.geometry.glyph_pitch = parse_number<int>(key, value);
  } else if (key == "line_pitch") {
    c.geometry.line_pitch = parse_number<int>(key, value);
  } else if (key == "line_height") {
    c.geometry.line_height = parse_number<int>(key, value);
  } else if (key == "margin") {
    c.geometry.margin = parse_number<int>(key, value);
  } else if (key == "jitter_x") {
    c.geometry.jitter_x = parse_number<double>(key, value);
  } else if (key == "jitter_y") {
    c.geometry.jitter_y = parse_number<double>(key, value);
  } else if (key == "line_shift_y") {
    c.geometry.line_shift_y = parse_number<double>(key, value);
  } else if (key == "noise") {
    c.geometry.noise = parse_number<double>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw InputError("unknown dataset setting '" + key + "'");
  }
}

namespace {

template <typename Config>
Config load_config(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& overrides,
                   std::initializer_list<const char*> path_keys) {
  Config config;
  const auto base = path.parent_path();
  for (const auto& [key, value] : read_key_values(path)) {
    const bool is_path = std::find_if(path_keys.begin(), path_keys.end(),
                                      [&](const char* k) { return key == k; }) != path_keys.end();
    apply_setting(config, key, is_path ? resolve(base, value).string() : value);
  }
  for (const auto& [key, value] : overrides) apply_setting(config, key, value);
  return config;
}

}  // namespace

TrainConfig load_train_config(const std::filesystem::path& path,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  TrainConfig c = load_config<TrainConfig>(path, overrides, {"data", "checkpoint"});
  c.validate();
  return c;
}

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream os;
  os << "mode = " << to_string(c.mode) << "\n"
     << "use_wh_ace = " << (c.use_wh_ace ? "true" : "false") << "\n"
     << "wh_ace_start_epoch = " << c.wh_ace_start_epoch << "\n"
     << "learning_rate = " << format_real(c.learning_rate) << "\n"
     << "final_lr_fraction = " << format_real(c.final_lr_fraction) << "\n"
     << "grad_clip = " << format_real(c.grad_clip) << "\n"
     << "batch_size = " << c.batch_size << "\n"
     << "epochs = " << c.epochs << "\n"
     << "max_train_samples = " << c.max_train_samples << "\n"
     << "threads = " << c.threads << "\n"
     << "seed = " << c.seed << "\n"
     << "data = " << c.data_dir.string() << "\n"
     << "checkpoint = " << c.checkpoint.string() << "\n"
     << "lambda_x = " << format_real(c.decode.lambda_x) << "\n"
     << "lambda_y = " << format_real(c.decode.lambda_y) << "\n"
     << "min_support = " << c.decode.min_support << "\n"
     << "downscale_input = " << (c.decode.downscale_input ? "true" : "false") << "\n"
     << "channels = " << format_list(c.model.channels) << "\n"
     << "strides = " << format_list(c.model.strides) << "\n"
     << "squeeze_channels = " << c.model.squeeze_channels << "\n"
     << "attention_size = " << c.model.attention_size << "\n"
     << "hidden_size = " << c.model.hidden_size << "\n"
     << "embedding_size = " << c.model.embedding_size << "\n"
     << "position_size = " << c.model.position_size << "\n"
     << "blank_bias = " << format_real(c.model.blank_bias) << "\n"
     << "model_seed = " << c.model.seed << "\n";
  return os.str();
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto [key, value] = split_assignment(t);
    apply_setting(c, key, value);
  }
  c.validate();
  return c;
}

DatasetConfig load_dataset_config(const std::filesystem::path& path,
                                  const std::vector<std::pair<std::string, std::string>>& overrides) {
  DatasetConfig c = load_config<DatasetConfig>(path, overrides, {"out"});
  c.validate();
  return c;
}

}  // namespace ifa
