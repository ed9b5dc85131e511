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

#include "ifa/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ifa/errors.hpp"

namespace ifa {
namespace {

GlyphFont::Bitmap parse_bitmap(const char* const (&rows)[GlyphFont::kRows]) {
  GlyphFont::Bitmap b{};
  for (int r = 0; r < GlyphFont::kRows; ++r) {
    for (int c = 0; c < GlyphFont::kCols; ++c) b[r * GlyphFont::kCols + c] = rows[r][c] == '#' ? 1 : 0;
  }
  return b;
}

// clang-format off
const char* const kGlyphs[][GlyphFont::kRows] = {
  {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // A
  {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."},  // B
  {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."},  // C
  {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."},  // D
  {"#####", "#....", "#....", "####.", "#....", "#....", "#####"},  // E
  {"#####", "#....", "#....", "####.", "#....", "#....", "#...."},  // F
  {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"},  // G
  {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"},  // H
  {"..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."},  // J
  {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"},  // K
  {"#....", "#....", "#....", "#....", "#....", "#....", "#####"},  // L
  {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"},  // M
  {"#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"},  // N
  {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."},  // P
  {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"},  // R
  {".####", "#....", "#....", ".###.", "....#", "....#", "####."},  // S
  {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."},  // T
  {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."},  // U
  {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."},  // V
  {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"},  // X
};
// clang-format on

std::string random_text(std::mt19937_64& rng, const Charset& charset, int min_len, int max_len,
                        double space_prob) {
  std::uniform_int_distribution<int> length(min_len, max_len);
  std::uniform_int_distribution<int> letter(0, charset.num_characters() - 1);
  std::bernoulli_distribution gap(space_prob);
  const int n = length(rng);
  std::string text;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && space_prob > 0.0 && gap(rng)) text.push_back(' ');
    text.push_back(charset.characters()[static_cast<std::size_t>(letter(rng))]);
  }
  return text;
}

void add_noise(GrayImage& image, double noise, std::uint64_t seed) {
  if (noise <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(noise);
  for (double& v : image.pixels) {
    if (flip(rng)) v = 1.0 - v;
  }
}

int clamp_jitter(std::mt19937_64& rng, double sigma, int lo, int hi) {
  if (sigma <= 0.0) return 0;
  std::normal_distribution<double> dist(0.0, sigma);
  return std::clamp(static_cast<int>(std::lround(dist(rng))), lo, hi);
}

constexpr std::uint64_t kPageStream = 0x9a9e5ull;
constexpr std::uint64_t kNoiseStream = 0x7015eull;

}  // namespace

GlyphFont::GlyphFont(std::string characters, std::vector<Bitmap> bitmaps, int scale)
    : characters_(std::move(characters)), bitmaps_(std::move(bitmaps)), scale_(scale) {
  if (characters_.size() != bitmaps_.size()) throw InputError("font needs one bitmap per character");
  if (scale_ < 1) throw InputError("font scale must be positive");
  for (const Bitmap& b : bitmaps_) {
    if (std::all_of(b.begin(), b.end(), [](std::uint8_t v) { return v == 0; })) {
      throw InputError("font bitmaps must not be empty");
    }
  }
}

GlyphFont GlyphFont::standard(int scale) {
  std::vector<Bitmap> bitmaps;
  for (const auto& rows : kGlyphs) bitmaps.push_back(parse_bitmap(rows));
  return GlyphFont(Charset::standard_characters(), std::move(bitmaps), scale);
}

bool GlyphFont::has(char c) const { return characters_.find(c) != std::string::npos; }

const GlyphFont::Bitmap& GlyphFont::bitmap(char c) const {
  const auto pos = characters_.find(c);
  if (pos == std::string::npos) throw InputError(std::string("font has no glyph for '") + c + "'");
  return bitmaps_[pos];
}

void PageSpec::validate(const GlyphFont& font) const {
  if (glyph_pitch < font.glyph_width()) throw InputError("glyph pitch narrower than the glyph");
  if (line_height < font.glyph_height()) throw InputError("line height shorter than the glyph");
  if (line_pitch < line_height) throw InputError("line pitch shorter than the line height");
  if (margin < 0) throw InputError("margin must be non-negative");
  if (!(noise >= 0.0 && noise < 1.0)) throw InputError("noise probability must lie in [0, 1)");
  if (jitter_x < 0.0 || jitter_y < 0.0 || line_shift_y < 0.0) throw InputError("jitter must be non-negative");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

// Draws the glyphs of `text` into `canvas` with the line box's top-left at
// (top, left); returns the label.
LabelSequence draw_line(GrayImage& canvas, Index top, Index left, const std::string& text,
                        const PageSpec& spec, const GlyphFont& font, const Charset& charset,
                        std::uint64_t line_index) {
  std::mt19937_64 rng(derive_seed(spec.seed, line_index));
  const int gw = font.glyph_width(), gh = font.glyph_height(), s = font.scale();
  const int slack_x = (spec.glyph_pitch - gw) / 2;
  const int centre_y = (spec.line_height - gh) / 2;
  const int base_y = centre_y + clamp_jitter(rng, spec.line_shift_y, -centre_y, spec.line_height - gh - centre_y);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == ' ') continue;
    const auto& bitmap = font.bitmap(c);
    const int dx = clamp_jitter(rng, spec.jitter_x, -slack_x, slack_x);
    const int dy = clamp_jitter(rng, spec.jitter_y, -base_y, spec.line_height - gh - base_y);
    const Index x0 = left + spec.margin + static_cast<Index>(i) * spec.glyph_pitch +
                     (spec.glyph_pitch - gw) / 2 + dx;
    const Index y0 = top + base_y + dy;
    for (int r = 0; r < GlyphFont::kRows; ++r) {
      for (int col = 0; col < GlyphFont::kCols; ++col) {
        if (!bitmap[r * GlyphFont::kCols + col]) continue;
        for (int yy = 0; yy < s; ++yy)
          for (int xx = 0; xx < s; ++xx) canvas.at(y0 + r * s + yy, x0 + col * s + xx) = 1.0;
      }
    }
  }
  return charset.encode(text);
}

void check_text(const std::string& text, const GlyphFont& font) {
  if (text.find_first_not_of(' ') == std::string::npos) throw InputError("line text must contain a character");
  for (char c : text) {
    if (c != ' ' && !font.has(c)) throw InputError(std::string("unknown character '") + c + "'");
  }
}

Index line_width(const std::string& text, const PageSpec& spec) {
  return 2 * spec.margin + static_cast<Index>(text.size()) * spec.glyph_pitch;
}

}  // namespace

RenderedLine render_line(const std::string& text, const PageSpec& spec, const GlyphFont& font,
                         const Charset& charset, std::uint64_t line_index) {
  spec.validate(font);
  check_text(text, font);
  RenderedLine out;
  out.image = GrayImage(spec.line_height, line_width(text, spec));
  out.label = draw_line(out.image, 0, 0, text, spec, font, charset, line_index);
  add_noise(out.image, spec.noise, derive_seed(spec.seed, kNoiseStream + line_index));
  return out;
}

RenderedPage render_page(const PageSpec& spec, const GlyphFont& font, const Charset& charset) {
  spec.validate(font);
  if (spec.lines.empty() || spec.lines.size() > 8) throw InputError("a page holds 1 to 8 lines");
  Index width = 0;
  for (const auto& text : spec.lines) {
    check_text(text, font);
    width = std::max(width, line_width(text, spec));
  }
  const Index n = static_cast<Index>(spec.lines.size());
  RenderedPage out;
  out.image = GrayImage(n * spec.line_pitch, width);
  std::mt19937_64 page_rng(derive_seed(spec.seed, kPageStream));
  const int slack = (spec.line_pitch - spec.line_height) / 2;
  for (Index i = 0; i < n; ++i) {
    const int dy = clamp_jitter(page_rng, spec.jitter_y, -slack, slack);
    const Index top = i * spec.line_pitch + slack + dy;
    out.line_labels.push_back(draw_line(out.image, top, 0, spec.lines[static_cast<std::size_t>(i)], spec, font,
                                        charset, static_cast<std::uint64_t>(i)));
    if (i) out.reading_order.push_back('\n');
    out.reading_order += charset.decode(out.line_labels.back());
  }
  add_noise(out.image, spec.noise, derive_seed(spec.seed, kNoiseStream + kPageStream));
  return out;
}

void DatasetConfig::validate() const {
  if (train_lines < 0 || eval_lines < 0 || eval_pages < 0) throw InputError("sample counts must be non-negative");
  if (min_length < 1 || max_length < min_length) throw InputError("invalid label length range");
  if (page_min_lines < 1 || page_max_lines < page_min_lines || page_max_lines > 8) {
    throw InputError("page line counts must satisfy 1 <= min <= max <= 8");
  }
  if (!(space_prob >= 0.0 && space_prob < 1.0)) throw InputError("space_prob must lie in [0, 1)");
}

std::vector<ManifestEntry> make_dataset(const DatasetConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  const GlyphFont font = GlyphFont::standard(config.font_scale);
  const Charset charset = Charset::standard(false);
  fs::create_directories(config.out_dir / "train");
  fs::create_directories(config.out_dir / "eval" / "line");
  fs::create_directories(config.out_dir / "eval" / "page");

  auto name = [](int j) {
    std::ostringstream os;
    os.width(6);
    os.fill('0');
    os << j << ".pgm";
    return os.str();
  };

  std::vector<ManifestEntry> entries;
  auto emit_lines = [&](int count, std::uint64_t split_id, const std::string& dir, const std::string& split) {
    for (int j = 0; j < count; ++j) {
      std::mt19937_64 rng(derive_seed(derive_seed(config.seed, split_id), static_cast<std::uint64_t>(j)));
      PageSpec spec = config.geometry;
      spec.seed = rng();
      const std::string text = random_text(rng, charset, config.min_length, config.max_length, config.space_prob);
      RenderedLine line = render_line(text, spec, font, charset);
      const std::string rel = dir + "/" + name(j);
      write_pgm(config.out_dir / rel, line.image);
      entries.push_back({rel, split, charset.decode(line.label)});
    }
  };
  emit_lines(config.train_lines, 0, "train", "train");
  emit_lines(config.eval_lines, 1, "eval/line", "eval-line");

  for (int j = 0; j < config.eval_pages; ++j) {
    std::mt19937_64 rng(derive_seed(derive_seed(config.seed, 2), static_cast<std::uint64_t>(j)));
    PageSpec spec = config.geometry;
    spec.seed = rng();
    std::uniform_int_distribution<int> lines(config.page_min_lines, config.page_max_lines);
    const int n = lines(rng);
    spec.lines.clear();
    for (int i = 0; i < n; ++i) {
      spec.lines.push_back(random_text(rng, charset, config.min_length, config.max_length, config.space_prob));
    }
    RenderedPage page = render_page(spec, font, charset);
    const std::string rel = "eval/page/" + name(j);
    write_pgm(config.out_dir / rel, page.image);
    entries.push_back({rel, "eval-page", page.reading_order});
  }
  write_manifest(config.out_dir / kManifestName, entries);
  return entries;
}

std::string escape_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\\') {
      out += "\\\\";
    } else if (c == '\t') {
      throw InputError("labels may not contain tabs");
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string unescape_label(const std::string& field) {
  std::string out;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == '\\' && i + 1 < field.size()) {
      const char next = field[++i];
      if (next == 'n') {
        out.push_back('\n');
      } else if (next == '\\') {
        out.push_back('\\');
      } else {
        throw FormatError(std::string("unknown escape \\") + next + " in manifest label");
      }
    } else {
      out.push_back(field[i]);
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& e : entries) os << e.path << '\t' << e.split << '\t' << escape_label(e.label) << '\n';
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected path<TAB>split<TAB>label");
    }
    entries.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), unescape_label(line.substr(t2 + 1))});
  }
  return entries;
}

}  // namespace ifa
