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

#include <iosfwd>
#include <string>
#include <vector>

#include "ifa/charset.hpp"
#include "ifa/image.hpp"
#include "ifa/nn.hpp"

namespace ifa {

/// Per-pixel class indices of a dense prediction, row-major [H, W].
struct ClassMap {
  Index height = 0;
  Index width = 0;
  std::vector<int> classes;

  int at(Index y, Index x) const { return classes[static_cast<std::size_t>(y * width + x)]; }
};

/// One merged character blob; coordinates are feature-grid cells.
struct CharDetection {
  double x = 0.0;  // centroid column
  double y = 0.0;  // centroid row
  int cls = 0;
  Index support = 1;

  bool operator==(const CharDetection&) const = default;
};

struct LineGroup {
  double anchor_y = 0.0;
  std::vector<CharDetection> chars;
};

struct DecodeParams {
  double lambda_x = 20.0;
  double lambda_y = 2.0;
  Index min_support = 1;
  /// Halve the input resolution before inference.
  bool downscale_input = false;

  void validate() const;
};

/// Ties go to the lowest class index.
ClassMap dense_argmax(const DensePrediction& pred);

/// Component id per pixel (-1 for background) under 8-connectivity of equal
/// non-background class. Ids follow the raster order of first pixels.
struct ComponentLabels {
  std::vector<int> labels;
  int count = 0;
};

ComponentLabels label_components(const ClassMap& map, const Charset& charset);

/// 8-connected components of equal non-background class, one detection per
/// component at its centroid. Blank and EOS are background. Detections are
/// ordered by their first pixel in raster order.
std::vector<CharDetection> merge_components(const ClassMap& map, const DecodeParams& params,
                                            const Charset& charset);

/// Left-to-right line grouping. Detections are sorted by x; each line is
/// seeded with the leftmost remaining detection and absorbs, in x order, every
/// detection within lambda_x horizontally and lambda_y vertically of the last
/// absorbed one. Lines are returned in ascending anchor_y.
std::vector<LineGroup> group_lines(std::vector<CharDetection> detections, const DecodeParams& params);

/// Characters of each line joined by '\n'.
std::string postprocess_lines(std::vector<CharDetection> detections, const DecodeParams& params,
                              const Charset& charset);

struct PageDecode {
  std::string text;
  std::vector<CharDetection> detections;
};

/// Backbone and classifier only: features -> dense prediction -> argmax ->
/// merged detections -> reading order.
PageDecode decode_page(const GrayImage& image, const Backbone& backbone, const ClassifierHead& head,
                       const DecodeParams& params, const Charset& charset);

/// Writes `x<TAB>y<TAB>class<TAB>support` per detection.
void write_detections(std::ostream& os, const std::vector<CharDetection>& detections, const Charset& charset);

}  // namespace ifa
