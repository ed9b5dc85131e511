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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ifa/charset.hpp"
#include "ifa/image.hpp"

namespace ifa {

/// 5x7 bitmap font, drawn at an integer scale.
class GlyphFont {
 public:
  static constexpr int kCols = 5;
  static constexpr int kRows = 7;
  using Bitmap = std::array<std::uint8_t, kCols * kRows>;

  GlyphFont(std::string characters, std::vector<Bitmap> bitmaps, int scale);
  /// Bitmaps for every character of Charset::standard_characters().
  static GlyphFont standard(int scale = 3);

  int scale() const { return scale_; }
  int glyph_width() const { return kCols * scale_; }
  int glyph_height() const { return kRows * scale_; }
  const std::string& characters() const { return characters_; }
  bool has(char c) const;
  const Bitmap& bitmap(char c) const;

 private:
  std::string characters_;
  std::vector<Bitmap> bitmaps_;
  int scale_;
};

/// Page geometry and randomness. All lengths are in pixels.
struct PageSpec {
  std::vector<std::string> lines;
  int glyph_pitch = 18;
  int line_pitch = 40;
  int line_height = 32;  // height of a single-line image
  int margin = 8;        // left and right padding of a line
  double jitter_x = 0.0;  // per-glyph standard deviations
  double jitter_y = 0.0;
  double line_shift_y = 0.0;  // standard deviation of a whole-line vertical shift
  double noise = 0.0;  // pixel flip probability
  std::uint64_t seed = 0;

  void validate(const GlyphFont& font) const;
};

/// Stable 64-bit mix of a seed and a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct RenderedLine {
  GrayImage image;
  LabelSequence label;
};

/// Renders `text` left to right with glyph jitter drawn from stream
/// derive_seed(spec.seed, line_index). Spaces leave an empty pitch.
RenderedLine render_line(const std::string& text, const PageSpec& spec, const GlyphFont& font,
                         const Charset& charset, std::uint64_t line_index = 0);

struct RenderedPage {
  GrayImage image;
  std::vector<LabelSequence> line_labels;
  std::string reading_order;  // line transcripts joined by '\n'
};

/// Stacks spec.lines (1 to 8) at spec.line_pitch. Line i uses the same glyph
/// stream as render_line(..., i); noise is applied once to the whole page.
RenderedPage render_page(const PageSpec& spec, const GlyphFont& font, const Charset& charset);

struct DatasetConfig {
  std::filesystem::path out_dir;
  int train_lines = 2000;
  int eval_lines = 200;
  int eval_pages = 100;
  int min_length = 3;
  int max_length = 8;
  int page_min_lines = 2;
  int page_max_lines = 4;
  double space_prob = 0.0;  // chance of a word gap between two characters
  int font_scale = 3;
  PageSpec geometry;  // lines and seed are ignored
  std::uint64_t seed = 42;

  void validate() const;
};

struct ManifestEntry {
  std::string path;   // relative to the dataset root
  std::string split;  // "train", "eval-line" or "eval-page"
  std::string label;  // reading-order transcript, lines separated by '\n'

  bool operator==(const ManifestEntry&) const = default;
};

inline constexpr const char* kManifestName = "manifest.tsv";

/// Writes train/, eval/line/, eval/page/ and manifest.tsv under out_dir.
/// Sample j of a split draws from derive_seed(derive_seed(seed, split), j).
std::vector<ManifestEntry> make_dataset(const DatasetConfig& config);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

std::string escape_label(const std::string& label);
std::string unescape_label(const std::string& field);

}  // namespace ifa
