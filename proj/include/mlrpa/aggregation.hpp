/* Copyright 2026 The mlrpa Authors. All Rights Reserved.

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

// Class-specific spatial softmax aggregation of logit planes into one
// positive and one negative logit per class, the logit-pair probability,
// and similarity-map export.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mlrpa/data.hpp"
#include "mlrpa/errors.hpp"
#include "mlrpa/heads.hpp"
#include "mlrpa/numerics.hpp"

namespace mlrpa {

/// Spatial softmax weights; each class slice of each plane sums to one.
struct AttentionMaps {
  Tensor positive;  // H x W x N
  Tensor negative;
};

/// Aggregated logits per class.
struct PredictionPair {
  std::vector<double> positive;
  std::vector<double> negative;

  std::size_t num_classes() const { return positive.size(); }
};

namespace detail {

inline Tensor spatial_softmax(const Tensor& plane) {
  const std::size_t cells = plane.dim(0) * plane.dim(1);
  const std::size_t n = plane.dim(2);
  Tensor out(plane.shape());
  for (std::size_t j = 0; j < n; ++j) {
    double m = plane[j];
    for (std::size_t c = 1; c < cells; ++c) m = std::max(m, plane[c * n + j]);
    double z = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      const double e = std::exp(plane[c * n + j] - m);
      out[c * n + j] = e;
      z += e;
    }
    for (std::size_t c = 0; c < cells; ++c) out[c * n + j] /= z;
  }
  return out;
}

}  // namespace detail

inline AttentionMaps attention_maps(const SpatialLogits& a) {
  return {detail::spatial_softmax(a.positive), detail::spatial_softmax(a.negative)};
}

/// Attention-weighted sum of each logit plane.
inline PredictionPair aggregate(const SpatialLogits& a, const AttentionMaps& maps) {
  if (maps.positive.shape() != a.positive.shape() || maps.negative.shape() != a.negative.shape()) {
    throw ShapeError("attention maps " + shape_to_string(maps.positive.shape()) +
                     " do not match logits " + shape_to_string(a.positive.shape()));
  }
  const std::size_t cells = a.cells();
  const std::size_t n = a.num_classes();
  PredictionPair p{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      p.positive[j] += maps.positive[c * n + j] * a.positive[c * n + j];
      p.negative[j] += maps.negative[c * n + j] * a.negative[c * n + j];
    }
  }
  return p;
}

inline PredictionPair aggregate(const SpatialLogits& a) { return aggregate(a, attention_maps(a)); }

/// Gradient of the aggregated logits w.r.t. the local logits.
/// With p = sum_k A_k a_k and A = softmax(a): dp/da_k = A_k (1 + a_k - p).
inline SpatialLogits aggregate_backward(const SpatialLogits& a, const AttentionMaps& maps,
                                        const PredictionPair& pred, std::span<const double> grad_positive,
                                        std::span<const double> grad_negative) {
  const std::size_t cells = a.cells();
  const std::size_t n = a.num_classes();
  if (grad_positive.size() != n || grad_negative.size() != n) {
    throw ShapeError("prediction gradient length does not match class count");
  }
  SpatialLogits g(a.height(), a.width(), n);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = c * n + j;
      g.positive[k] = grad_positive[j] * maps.positive[k] * (1.0 + a.positive[k] - pred.positive[j]);
      g.negative[k] = grad_negative[j] * maps.negative[k] * (1.0 + a.negative[k] - pred.negative[j]);
    }
  }
  return g;
}

/// Two-way softmax of the pair: y = 1 / (1 + exp(p- - p+)).
inline std::vector<double> pair_probability(const PredictionPair& p) {
  if (p.positive.size() != p.negative.size()) throw ShapeError("prediction pair halves differ in length");
  std::vector<double> y(p.positive.size());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = sigmoid(p.positive[j] - p.negative[j]);
  return y;
}

// ---------------------------------------------------------------------------
// Similarity-map export

enum class Polarity { kPositive, kNegative };

/// H x W slice of one class plane.
inline Tensor logit_slice(const SpatialLogits& a, std::size_t class_index, Polarity polarity) {
  if (class_index >= a.num_classes()) {
    throw DomainError("class index " + std::to_string(class_index) + " out of range [0, " +
                      std::to_string(a.num_classes()) + ")");
  }
  const Tensor& plane = a.plane(polarity == Polarity::kPositive);
  const std::size_t n = a.num_classes();
  Tensor out({a.height(), a.width()});
  for (std::size_t c = 0; c < a.cells(); ++c) out[c] = plane[c * n + class_index];
  return out;
}

/// ASCII "P2" graymap, min-max normalized to [0, 255]. A constant slice
/// renders every pixel as 128.
inline std::string render_pgm(const Tensor& slice) {
  const auto v = slice.values();
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  std::string out = "P2\n" + std::to_string(slice.dim(1)) + " " + std::to_string(slice.dim(0)) + "\n255\n";
  for (std::size_t h = 0; h < slice.dim(0); ++h) {
    for (std::size_t w = 0; w < slice.dim(1); ++w) {
      const double x = v[h * slice.dim(1) + w];
      const long px = hi > lo ? std::lround(255.0 * (x - lo) / (hi - lo)) : 128;
      out += (w ? " " : "") + std::to_string(px);
    }
    out += "\n";
  }
  return out;
}

/// Writes `<prefix>.mlt` (raw slice) and `<prefix>.pgm`.
inline void export_similarity_map(const SpatialLogits& a, std::size_t class_index, Polarity polarity,
                                  const std::filesystem::path& prefix) {
  const Tensor slice = logit_slice(a, class_index, polarity);
  auto mlt = prefix;
  mlt += ".mlt";
  auto pgm = prefix;
  pgm += ".pgm";
  try {
    write_tensor_file(slice, mlt);
    write_bytes(pgm, render_pgm(slice));
  } catch (const IoError& e) {
    throw IoError(std::string("exporting similarity map to '") + prefix.string() + "': " + e.what());
  }
}

}  // namespace mlrpa
