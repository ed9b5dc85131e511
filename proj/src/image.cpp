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

#include "ifa/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "ifa/errors.hpp"

namespace ifa {

Tensor to_tensor(const GrayImage& image) {
  return Tensor(Shape{1, image.height, image.width}, image.pixels);
}

GrayImage downscale_half(const GrayImage& image) {
  GrayImage out(image.height / 2, image.width / 2);
  for (Index y = 0; y < out.height; ++y) {
    for (Index x = 0; x < out.width; ++x) {
      out.at(y, x) = 0.25 * (image.at(2 * y, 2 * x) + image.at(2 * y, 2 * x + 1) +
                             image.at(2 * y + 1, 2 * x) + image.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::string bytes(image.pixels.size(), '\0');
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = std::clamp(image.pixels[i], 0.0, 1.0);
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& is) {
  std::string token;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  if (next_token(is) != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");
  Index width = 0, height = 0, maxval = 0;
  try {
    width = std::stol(next_token(is));
    height = std::stol(next_token(is));
    maxval = std::stol(next_token(is));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed PGM header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw FormatError(path.string() + ": unsupported PGM dimensions or maxval");
  }
  std::string bytes(static_cast<std::size_t>(width * height), '\0');
  is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (is.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(path.string() + ": truncated PGM payload");
  }
  GrayImage image(height, width);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    image.pixels[i] = static_cast<double>(static_cast<unsigned char>(bytes[i])) / static_cast<double>(maxval);
  }
  return image;
}

}  // namespace ifa
