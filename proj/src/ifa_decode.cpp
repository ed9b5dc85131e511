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

#include "ifa/ifa_decode.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ifa/errors.hpp"

namespace ifa {

void DecodeParams::validate() const {
  if (!(lambda_x > 0.0) || !(lambda_y > 0.0)) throw InputError("lambda_x and lambda_y must be positive");
  if (min_support < 1) throw InputError("min_support must be at least 1");
}

ClassMap dense_argmax(const DensePrediction& pred) {
  const Index k = pred.num_classes(), h = pred.height(), w = pred.width();
  ClassMap map{h, w, std::vector<int>(static_cast<std::size_t>(h * w), 0)};
  auto p = pred.probs.values();
  const Index n = h * w;
  for (Index cell = 0; cell < n; ++cell) {
    int best = 0;
    for (Index c = 1; c < k; ++c) {
      if (p[c * n + cell] > p[best * n + cell]) best = static_cast<int>(c);
    }
    map.classes[cell] = best;
  }
  return map;
}

ComponentLabels label_components(const ClassMap& map, const Charset& charset) {
  ComponentLabels out;
  out.labels.assign(map.classes.size(), -1);
  std::vector<Index> frontier;
  for (Index seed = 0; seed < static_cast<Index>(map.classes.size()); ++seed) {
    const int cls = map.classes[seed];
    if (out.labels[seed] >= 0 || !charset.is_character(cls)) continue;
    // Flood fill over the 8-neighbourhood.
    const int id = out.count++;
    out.labels[seed] = id;
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const Index cell = frontier.back();
      frontier.pop_back();
      const Index cy = cell / map.width, cx = cell % map.width;
      for (Index dy = -1; dy <= 1; ++dy) {
        for (Index dx = -1; dx <= 1; ++dx) {
          const Index ny = cy + dy, nx = cx + dx;
          if (ny < 0 || ny >= map.height || nx < 0 || nx >= map.width) continue;
          const Index next = ny * map.width + nx;
          if (out.labels[next] < 0 && map.classes[next] == cls) {
            out.labels[next] = id;
            frontier.push_back(next);
          }
        }
      }
    }
  }
  return out;
}

std::vector<CharDetection> merge_components(const ClassMap& map, const DecodeParams& params,
                                            const Charset& charset) {
  params.validate();
  const ComponentLabels comp = label_components(map, charset);
  std::vector<CharDetection> out(static_cast<std::size_t>(comp.count));
  std::vector<Index> support(out.size(), 0);
  for (Index i = 0; i < static_cast<Index>(comp.labels.size()); ++i) {
    const int id = comp.labels[i];
    if (id < 0) continue;
    CharDetection& d = out[static_cast<std::size_t>(id)];
    d.x += static_cast<double>(i % map.width);
    d.y += static_cast<double>(i / map.width);
    d.cls = map.classes[i];
    ++support[static_cast<std::size_t>(id)];
  }
  std::vector<CharDetection> kept;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (support[k] < params.min_support) continue;
    const double n = static_cast<double>(support[k]);
    kept.push_back(CharDetection{out[k].x / n, out[k].y / n, out[k].cls, support[k]});
  }
  return kept;
}

std::vector<LineGroup> group_lines(std::vector<CharDetection> detections, const DecodeParams& params) {
  params.validate();
  std::sort(detections.begin(), detections.end(), [](const CharDetection& a, const CharDetection& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    if (a.cls != b.cls) return a.cls < b.cls;
    return a.support < b.support;
  });

  std::vector<LineGroup> lines;
  std::vector<bool> taken(detections.size(), false);
  for (std::size_t seed = 0; seed < detections.size(); ++seed) {
    if (taken[seed]) continue;
    taken[seed] = true;
    LineGroup line{detections[seed].y, {detections[seed]}};
    double xp = detections[seed].x, yp = detections[seed].y;
    for (std::size_t i = seed + 1; i < detections.size(); ++i) {
      if (taken[i]) continue;
      const CharDetection& d = detections[i];
      if (d.x - xp < params.lambda_x && std::abs(d.y - yp) < params.lambda_y) {
        xp = d.x;
        yp = d.y;
        line.chars.push_back(d);
        taken[i] = true;
      }
    }
    lines.push_back(std::move(line));
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const LineGroup& a, const LineGroup& b) { return a.anchor_y < b.anchor_y; });
  return lines;
}

std::string postprocess_lines(std::vector<CharDetection> detections, const DecodeParams& params,
                              const Charset& charset) {
  std::string text;
  bool first = true;
  for (const LineGroup& line : group_lines(std::move(detections), params)) {
    if (!first) text.push_back('\n');
    first = false;
    for (const CharDetection& d : line.chars) text.push_back(charset.symbol(d.cls));
  }
  return text;
}

PageDecode decode_page(const GrayImage& image, const Backbone& backbone, const ClassifierHead& head,
                       const DecodeParams& params, const Charset& charset) {
  NoGradGuard no_grad;
  const GrayImage& input = params.downscale_input ? downscale_half(image) : image;
  FeatureMap features = extract_features(input, backbone);
  DensePrediction pred = classify_dense(features, head);
  PageDecode out;
  out.detections = merge_components(dense_argmax(pred), params, charset);
  out.text = postprocess_lines(out.detections, params, charset);
  return out;
}

void write_detections(std::ostream& os, const std::vector<CharDetection>& detections, const Charset& charset) {
  for (const CharDetection& d : detections) {
    os << d.x << '\t' << d.y << '\t' << charset.symbol(d.cls) << '\t' << d.support << '\n';
  }
}

}  // namespace ifa
