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

#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "mlrpa/numerics.hpp"

namespace mlrpa {

/// Spatial feature tensor of one image, H x W x d, from a frozen visual encoder.
class FeatureMap {
 public:
  FeatureMap() = default;

  explicit FeatureMap(Tensor values) : values_(std::move(values)) {
    if (values_.rank() != 3) {
      throw ShapeError("feature map must be rank 3 (H x W x d), got shape " +
                       shape_to_string(values_.shape()));
    }
  }

  FeatureMap(std::size_t h, std::size_t w, std::size_t d) : FeatureMap(Tensor({h, w, d})) {}

  std::size_t height() const { return values_.dim(0); }
  std::size_t width() const { return values_.dim(1); }
  std::size_t channels() const { return values_.dim(2); }
  std::size_t cells() const { return height() * width(); }

  /// Feature vector of flat cell index `c` = h * W + w.
  std::span<const double> cell(std::size_t c) const {
    return values_.values().subspan(c * channels(), channels());
  }
  std::span<double> cell(std::size_t c) {
    return values_.values().subspan(c * channels(), channels());
  }
  std::span<const double> cell(std::size_t h, std::size_t w) const {
    return cell(h * width() + w);
  }

  const Tensor& tensor() const { return values_; }
  Tensor& tensor() { return values_; }

 private:
  Tensor values_;
};

}  // namespace mlrpa
