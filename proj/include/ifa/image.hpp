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
#include <vector>

#include "ifa/tensor.hpp"

namespace ifa {

/// Grayscale raster in [0, 1], row-major; 1 is ink.
struct GrayImage {
  Index height = 0;
  Index width = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(Index h, Index w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h * w), fill) {}

  double& at(Index y, Index x) { return pixels[static_cast<std::size_t>(y * width + x)]; }
  double at(Index y, Index x) const { return pixels[static_cast<std::size_t>(y * width + x)]; }

  bool operator==(const GrayImage&) const = default;
};

/// [1, H, W] tensor view of the image (copied).
Tensor to_tensor(const GrayImage& image);

/// 2x2 box-filter downscale (odd trailing rows/columns are dropped).
GrayImage downscale_half(const GrayImage& image);

/// Binary PGM (P5, maxval 255). Pixels are quantized to round(255 * v).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace ifa
