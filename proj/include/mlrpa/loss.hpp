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

// Asymmetric loss over ternary labels with analytic gradients.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mlrpa/aggregation.hpp"
#include "mlrpa/data.hpp"
#include "mlrpa/errors.hpp"
#include "mlrpa/numerics.hpp"

namespace mlrpa {

struct LossConfig {
  double gamma_plus = 1.0;
  double gamma_minus = 2.0;
  double delta = 0.05;
  // Treat the focusing weights as constants when differentiating.
  bool focal_detach = false;

  void validate() const {
    if (!(gamma_plus >= 0.0) || !(gamma_minus >= 0.0)) throw DomainError("focusing parameters must be >= 0");
    if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
  }
};

namespace detail {

inline void check_label(int y) {
  if (y != 1 && y != -1 && y != 0) throw DomainError("label " + std::to_string(y) + " is not one of {1,-1,0}");
}

inline void check_probability(double y_hat) {
  if (!(y_hat > 0.0 && y_hat < 1.0)) {
    throw DomainError("predicted probability " + std::to_string(y_hat) + " is outside (0, 1)");
  }
}

// x^g with 0^0 = 1 and a zero exponent short-circuiting.
inline double focus_pow(double x, double g) { return g == 0.0 ? 1.0 : std::pow(x, g); }

}  // namespace detail

/// Per-label loss.
///   y = +1:  -(1 - y^)^g+ log(y^)
///   y = -1:  -(q)^g- log(1 - q),  q = max(y^ - delta, 0)
///   y =  0:  0
inline double asl_term(int y, double y_hat, const LossConfig& cfg) {
  detail::check_label(y);
  detail::check_probability(y_hat);
  if (y == 0) return 0.0;
  if (y == 1) return -detail::focus_pow(1.0 - y_hat, cfg.gamma_plus) * std::log(y_hat);
  const double q = std::max(y_hat - cfg.delta, 0.0);
  if (q == 0.0) return 0.0;
  return -detail::focus_pow(q, cfg.gamma_minus) * std::log1p(-q);
}

/// d asl_term / d y^. At the clamp kink y^ = delta the gradient is taken as 0.
inline double asl_grad(int y, double y_hat, const LossConfig& cfg) {
  detail::check_label(y);
  detail::check_probability(y_hat);
  if (y == 0) return 0.0;
  if (y == 1) {
    const double s = 1.0 - y_hat;
    const double g = cfg.gamma_plus;
    const double focus_term =
        (g == 0.0 || cfg.focal_detach) ? 0.0 : g * detail::focus_pow(s, g - 1.0) * std::log(y_hat);
    return focus_term - detail::focus_pow(s, g) / y_hat;
  }
  const double q = y_hat - cfg.delta;
  if (q <= 0.0) return 0.0;
  const double g = cfg.gamma_minus;
  const double focus_term =
      (g == 0.0 || cfg.focal_detach) ? 0.0 : -g * detail::focus_pow(q, g - 1.0) * std::log1p(-q);
  return focus_term + detail::focus_pow(q, g) / (1.0 - q);
}

struct AslValue {
  double loss = 0.0;
  double grad_logit = 0.0;  // d loss / d (p+ - p-)
};

/// Loss and gradient as functions of the logit difference t = p+ - p-,
/// with y^ = sigmoid(t). Evaluated through softplus and sigmoid(-t) so that
/// saturated logits neither hit the (0, 1) domain boundary nor lose precision.
inline AslValue asl_from_logit(int y, double t, const LossConfig& cfg) {
  detail::check_label(y);
  if (y == 0) return {};
  const double y_hat = sigmoid(t);
  const double s = sigmoid(-t);  // 1 - y^
  if (y == 1) {
    const double g = cfg.gamma_plus;
    const double log_y = -softplus(-t);
    const double w = detail::focus_pow(s, g);
    AslValue v;
    v.loss = -w * log_y;
    v.grad_logit = -w * s;
    if (g != 0.0 && !cfg.focal_detach) v.grad_logit += g * w * y_hat * log_y;
    return v;
  }
  const double q = y_hat - cfg.delta;
  if (q <= 0.0) return {};
  const double g = cfg.gamma_minus;
  const double one_minus_q = s + cfg.delta;
  const double log_1mq = cfg.delta > 0.0 ? std::log(one_minus_q) : -softplus(t);
  const double ratio = cfg.delta > 0.0 ? s / one_minus_q : 1.0;  // s / (1 - q)
  const double w = detail::focus_pow(q, g);
  AslValue v;
  v.loss = -w * log_1mq;
  v.grad_logit = w * y_hat * ratio;
  if (g != 0.0 && !cfg.focal_detach) {
    v.grad_logit += -g * detail::focus_pow(q, g - 1.0) * log_1mq * y_hat * s;
  }
  return v;
}

/// Loss of one image and its gradient w.r.t. both aggregated logit vectors.
struct ImageLoss {
  double total = 0.0;
  std::vector<double> grad_positive;
  std::vector<double> grad_negative;
};

inline ImageLoss image_loss(const PredictionPair& pred, std::span<const std::int8_t> labels,
                            const LossConfig& cfg) {
  const std::size_t n = pred.num_classes();
  if (labels.size() != n || pred.negative.size() != n) {
    throw ShapeError("prediction has " + std::to_string(n) + " classes, label row has " +
                     std::to_string(labels.size()));
  }
  ImageLoss out{0.0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto v = asl_from_logit(labels[j], pred.positive[j] - pred.negative[j], cfg);
    out.total += v.loss;
    out.grad_positive[j] = v.grad_logit;
    out.grad_negative[j] = -v.grad_logit;
  }
  return out;
}

struct BatchLoss {
  double total = 0.0;
  std::vector<ImageLoss> per_image;
};

/// Sum of per-label losses over images and classes. Unknown labels are no-ops.
inline BatchLoss batch_loss(const std::vector<PredictionPair>& preds, const LabelMatrix& labels,
                            const LossConfig& cfg) {
  cfg.validate();
  if (preds.size() != labels.num_images()) {
    throw ShapeError(std::to_string(preds.size()) + " predictions for " +
                     std::to_string(labels.num_images()) + " label rows");
  }
  BatchLoss out;
  out.per_image.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out.per_image.push_back(image_loss(preds[i], labels.row(i), cfg));
    out.total += out.per_image.back().total;
  }
  return out;
}

}  // namespace mlrpa
