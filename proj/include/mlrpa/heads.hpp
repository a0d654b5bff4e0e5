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

// Scoring heads mapping a feature map to per-class positive and negative
// spatial logits: the linear projector and the class-embedding bank head
// (PositiveCoOp, NegativeCoOp and free-dual configurations).

#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlrpa/errors.hpp"
#include "mlrpa/feature_map.hpp"
#include "mlrpa/numerics.hpp"

namespace mlrpa {

/// Per-class positive and negative logit planes, each H x W x N.
struct SpatialLogits {
  Tensor positive;
  Tensor negative;

  SpatialLogits() = default;
  SpatialLogits(std::size_t h, std::size_t w, std::size_t n)
      : positive({h, w, n}), negative({h, w, n}) {}
  SpatialLogits(Tensor pos, Tensor neg) : positive(std::move(pos)), negative(std::move(neg)) {
    if (positive.rank() != 3 || positive.shape() != negative.shape()) {
      throw ShapeError("logit planes must share an H x W x N shape, got " +
                       shape_to_string(positive.shape()) + " and " +
                       shape_to_string(negative.shape()));
    }
  }

  std::size_t height() const { return positive.dim(0); }
  std::size_t width() const { return positive.dim(1); }
  std::size_t cells() const { return height() * width(); }
  std::size_t num_classes() const { return positive.dim(2); }

  const Tensor& plane(bool positive_side) const { return positive_side ? positive : negative; }
  Tensor& plane(bool positive_side) { return positive_side ? positive : negative; }
};

enum class LrGroup { kProjector, kPromptAnchor, kFreeEmbedding };

inline std::string_view lr_group_name(LrGroup g) {
  switch (g) {
    case LrGroup::kProjector: return "projector";
    case LrGroup::kPromptAnchor: return "prompt_anchor";
    case LrGroup::kFreeEmbedding: return "free_embedding";
  }
  return "?";
}

/// Handle to one trainable tensor of a head.
struct ParamRef {
  std::string name;
  LrGroup group;
  Tensor* tensor;
};

/// What the training loop needs from a head. `backward` returns gradients
/// aligned with `parameters()`.
template <typename H>
concept ScoringHead = requires(H head, const H chead, const FeatureMap& z, const SpatialLogits& g) {
  { chead.forward(z) } -> std::same_as<SpatialLogits>;
  { chead.backward(z, g) } -> std::same_as<std::vector<Tensor>>;
  { head.parameters() } -> std::same_as<std::vector<ParamRef>>;
  { chead.num_classes() } -> std::convertible_to<std::size_t>;
  { chead.channels() } -> std::convertible_to<std::size_t>;
};

// ---------------------------------------------------------------------------
// Linear projector

/// Affine map of each d-dimensional cell to 2N logits. Row 2j of the weight
/// produces the positive logit of class j, row 2j+1 the negative one.
struct ProjectorHead {
  Tensor weight;  // 2N x d
  Tensor bias;    // 2N
  bool use_bias = true;

  std::size_t num_classes() const { return weight.dim(0) / 2; }
  std::size_t channels() const { return weight.dim(1); }

  void validate() const {
    if (weight.rank() != 2 || weight.dim(0) % 2 != 0) {
      throw ShapeError("projector weight must be (2N) x d, got " + shape_to_string(weight.shape()));
    }
    if (bias.shape() != Shape{weight.dim(0)}) {
      throw ShapeError("projector bias must have length " + std::to_string(weight.dim(0)));
    }
  }

  SpatialLogits forward(const FeatureMap& z) const;
  std::vector<Tensor> backward(const FeatureMap& z, const SpatialLogits& grad) const;

  std::vector<ParamRef> parameters() {
    std::vector<ParamRef> out{{"projector.weight", LrGroup::kProjector, &weight}};
    if (use_bias) out.push_back({"projector.bias", LrGroup::kProjector, &bias});
    return out;
  }
};

/// Uniform(-1/sqrt(d), 1/sqrt(d)) init of weight and bias.
inline ProjectorHead make_projector(std::size_t num_classes, std::size_t dim, std::uint64_t seed,
                                    bool use_bias = true) {
  if (num_classes < 1 || dim < 1) throw DomainError("projector dims must be >= 1");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  ProjectorHead head{Tensor({2 * num_classes, dim}), Tensor({2 * num_classes}), use_bias};
  for (double& v : head.weight.values()) v = bound * (2.0 * rng.uniform() - 1.0);
  if (use_bias) {
    for (double& v : head.bias.values()) v = bound * (2.0 * rng.uniform() - 1.0);
  }
  return head;
}

inline SpatialLogits projector_forward(const ProjectorHead& head, const FeatureMap& z) {
  head.validate();
  if (z.channels() != head.channels()) {
    throw ShapeError("feature channels " + std::to_string(z.channels()) +
                     " do not match projector input width " + std::to_string(head.channels()));
  }
  const std::size_t n = head.num_classes();
  SpatialLogits out(z.height(), z.width(), n);
  for (std::size_t c = 0; c < z.cells(); ++c) {
    const auto x = z.cell(c);
    for (std::size_t j = 0; j < n; ++j) {
      double pos = dot(head.weight.row(2 * j), x);
      double neg = dot(head.weight.row(2 * j + 1), x);
      if (head.use_bias) {
        pos += head.bias[2 * j];
        neg += head.bias[2 * j + 1];
      }
      out.positive[c * n + j] = pos;
      out.negative[c * n + j] = neg;
    }
  }
  return out;
}

struct ProjectorGrad {
  Tensor weight;
  Tensor bias;
};

inline ProjectorGrad projector_backward(const ProjectorHead& head, const FeatureMap& z,
                                        const SpatialLogits& grad) {
  const std::size_t n = head.num_classes();
  const std::size_t d = head.channels();
  if (grad.positive.shape() != Shape{z.height(), z.width(), n}) {
    throw ShapeError("logit gradient shape " + shape_to_string(grad.positive.shape()) +
                     " does not match the projector output");
  }
  ProjectorGrad g{Tensor(head.weight.shape()), Tensor(head.bias.shape())};
  for (std::size_t c = 0; c < z.cells(); ++c) {
    const auto x = z.cell(c);
    for (std::size_t j = 0; j < n; ++j) {
      const double gp = grad.positive[c * n + j];
      const double gn = grad.negative[c * n + j];
      auto wp = g.weight.row(2 * j);
      auto wn = g.weight.row(2 * j + 1);
      for (std::size_t k = 0; k < d; ++k) {
        wp[k] += gp * x[k];
        wn[k] += gn * x[k];
      }
      g.bias[2 * j] += gp;
      g.bias[2 * j + 1] += gn;
    }
  }
  return g;
}

inline SpatialLogits ProjectorHead::forward(const FeatureMap& z) const {
  return projector_forward(*this, z);
}

inline std::vector<Tensor> ProjectorHead::backward(const FeatureMap& z, const SpatialLogits& grad) const {
  auto g = projector_backward(*this, z, grad);
  std::vector<Tensor> out;
  out.push_back(std::move(g.weight));
  if (use_bias) out.push_back(std::move(g.bias));
  return out;
}

// ---------------------------------------------------------------------------
// Embedding bank

/// How one side (positive or negative) of a bank is obtained and trained.
enum class SideMode {
  kAnchorFrozen,     // fixed at the text-derived anchor
  kAnchorLearnable,  // initialized at the anchor, trained at the prompt rate
  kFreeLearnable,    // small random init, trained at the free-embedding rate
};

inline std::string_view side_mode_name(SideMode m) {
  switch (m) {
    case SideMode::kAnchorFrozen: return "anchor-frozen";
    case SideMode::kAnchorLearnable: return "anchor-learnable";
    case SideMode::kFreeLearnable: return "free-learnable";
  }
  return "?";
}

inline SideMode parse_side_mode(std::string_view s) {
  if (s == "anchor-frozen") return SideMode::kAnchorFrozen;
  if (s == "anchor-learnable") return SideMode::kAnchorLearnable;
  if (s == "free-learnable") return SideMode::kFreeLearnable;
  throw DomainError("unknown side mode '" + std::string(s) + "'");
}

/// Per-class positive and negative vectors r_{j,+}, r_{j,-}.
struct EmbeddingBank {
  Tensor positive;  // N x d
  Tensor negative;  // N x d
  SideMode positive_mode = SideMode::kFreeLearnable;
  SideMode negative_mode = SideMode::kFreeLearnable;
  Tensor anchors_positive;  // N x d, required unless the side is free
  Tensor anchors_negative;

  std::size_t num_classes() const { return positive.dim(0); }
  std::size_t channels() const { return positive.dim(1); }

  void validate() const {
    if (positive.rank() != 2 || positive.shape() != negative.shape()) {
      throw ShapeError("bank sides must share an N x d shape, got " +
                       shape_to_string(positive.shape()) + " and " + shape_to_string(negative.shape()));
    }
    auto check_anchor = [&](SideMode mode, const Tensor& anchor, const char* side) {
      if (mode == SideMode::kFreeLearnable) return;
      if (anchor.empty()) {
        throw ShapeError(std::string(side) + " side is " + std::string(side_mode_name(mode)) +
                         " but no anchor matrix was given");
      }
      if (anchor.shape() != positive.shape()) {
        throw ShapeError(std::string(side) + " anchors have shape " + shape_to_string(anchor.shape()) +
                         ", bank is " + shape_to_string(positive.shape()));
      }
    };
    check_anchor(positive_mode, anchors_positive, "positive");
    check_anchor(negative_mode, anchors_negative, "negative");
  }
};

/// Random zero-mean rows with norm in [0.1, 0.2].
inline Tensor free_embedding_init(std::size_t num_classes, std::size_t dim, Rng& rng) {
  Tensor out({num_classes, dim});
  for (std::size_t j = 0; j < num_classes; ++j) {
    auto row = out.row(j);
    double n2;
    do {
      for (double& v : row) v = rng.normal();
      n2 = l2_norm(row);
    } while (!(n2 > 0.0));
    const double radius = 0.1 + 0.1 * (1.0 - rng.uniform());  // (0.1, 0.2]
    for (double& v : row) v *= radius / n2;
  }
  return out;
}

/// General constructor. Anchor sides start at their anchors; free sides draw
/// from stream 0 (positive) or 1 (negative) of `init_seed`, except that a bank
/// with exactly one free side always uses stream 0 for it.
inline EmbeddingBank make_bank(std::size_t num_classes, std::size_t dim, SideMode positive_mode,
                               SideMode negative_mode, const Tensor& anchors_positive,
                               const Tensor& anchors_negative, std::uint64_t init_seed) {
  if (num_classes < 1 || dim < 1) throw DomainError("bank dims must be >= 1");
  const bool pos_free = positive_mode == SideMode::kFreeLearnable;
  const bool neg_free = negative_mode == SideMode::kFreeLearnable;
  EmbeddingBank bank;
  bank.positive_mode = positive_mode;
  bank.negative_mode = negative_mode;
  if (!pos_free) bank.anchors_positive = anchors_positive;
  if (!neg_free) bank.anchors_negative = anchors_negative;
  if (pos_free) {
    Rng rng(init_seed, 0);
    bank.positive = free_embedding_init(num_classes, dim, rng);
  } else {
    bank.positive = anchors_positive;
  }
  if (neg_free) {
    Rng rng(init_seed, pos_free ? 1 : 0);
    bank.negative = free_embedding_init(num_classes, dim, rng);
  } else {
    bank.negative = anchors_negative;
  }
  bank.validate();
  if (bank.num_classes() != num_classes || bank.channels() != dim) {
    throw ShapeError("anchors have shape " + shape_to_string(bank.positive.shape()) + ", expected [" +
                     std::to_string(num_classes) + "," + std::to_string(dim) + "]");
  }
  return bank;
}

/// Text-guided positive side, free negative side.
inline EmbeddingBank make_positivecoop(const Tensor& anchors_pos, std::size_t dim, std::uint64_t init_seed) {
  if (anchors_pos.rank() != 2) throw ShapeError("anchors must be N x d");
  return make_bank(anchors_pos.dim(0), dim, SideMode::kAnchorLearnable, SideMode::kFreeLearnable,
                   anchors_pos, Tensor(), init_seed);
}

/// Text-guided negative side, free positive side.
inline EmbeddingBank make_negativecoop(const Tensor& anchors_neg, std::size_t dim, std::uint64_t init_seed) {
  if (anchors_neg.rank() != 2) throw ShapeError("anchors must be N x d");
  return make_bank(anchors_neg.dim(0), dim, SideMode::kFreeLearnable, SideMode::kAnchorLearnable,
                   Tensor(), anchors_neg, init_seed);
}

inline EmbeddingBank make_free_dual(std::size_t num_classes, std::size_t dim, std::uint64_t init_seed) {
  return make_bank(num_classes, dim, SideMode::kFreeLearnable, SideMode::kFreeLearnable, Tensor(),
                   Tensor(), init_seed);
}

namespace detail {

inline Tensor normalized_rows(const Tensor& m, const char* what) {
  Tensor out = m;
  for (std::size_t i = 0; i < m.dim(0); ++i) {
    auto row = out.row(i);
    const double n = l2_norm(row);
    if (!(n > 0.0)) {
      throw DegenerateInputError(std::string(what) + " row " + std::to_string(i) + " has zero norm");
    }
    for (double& v : row) v /= n;
  }
  return out;
}

inline Tensor normalized_cells(const FeatureMap& z) {
  return normalized_rows(z.tensor().reshaped({z.cells(), z.channels()}), "feature cell");
}

}  // namespace detail

/// logit[h,w,j] = cos(z[h,w,:], r_j) / temperature for each side.
inline SpatialLogits embedding_forward(const EmbeddingBank& bank, const FeatureMap& z, double temperature) {
  bank.validate();
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  if (z.channels() != bank.channels()) {
    throw ShapeError("feature channels " + std::to_string(z.channels()) +
                     " do not match bank dimension " + std::to_string(bank.channels()));
  }
  const std::size_t n = bank.num_classes();
  const Tensor zn = detail::normalized_cells(z);
  const Tensor rp = detail::normalized_rows(bank.positive, "positive embedding");
  const Tensor rn = detail::normalized_rows(bank.negative, "negative embedding");
  SpatialLogits out(z.height(), z.width(), n);
  for (std::size_t c = 0; c < z.cells(); ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      out.positive[c * n + j] = dot(zn.row(c), rp.row(j)) / temperature;
      out.negative[c * n + j] = dot(zn.row(c), rn.row(j)) / temperature;
    }
  }
  return out;
}

struct BankGrad {
  Tensor positive;
  Tensor negative;
};

/// Gradient of a loss w.r.t. both bank sides given its gradient w.r.t. the
/// logits: d cos(z, r)/dr = (z^ - cos * r^) / |r|.
inline BankGrad embedding_backward(const EmbeddingBank& bank, const FeatureMap& z, double temperature,
                                   const SpatialLogits& grad) {
  const std::size_t n = bank.num_classes();
  const std::size_t d = bank.channels();
  if (grad.positive.shape() != Shape{z.height(), z.width(), n}) {
    throw ShapeError("logit gradient shape " + shape_to_string(grad.positive.shape()) +
                     " does not match the bank output");
  }
  const Tensor zn = detail::normalized_cells(z);
  BankGrad g{Tensor(bank.positive.shape()), Tensor(bank.negative.shape())};
  auto side = [&](const Tensor& r, const Tensor& plane, Tensor& out) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto rj = r.row(j);
      const double norm = l2_norm(rj);
      if (!(norm > 0.0)) throw DegenerateInputError("embedding row " + std::to_string(j) + " has zero norm");
      auto gj = out.row(j);
      for (std::size_t c = 0; c < z.cells(); ++c) {
        const double upstream = plane[c * n + j];
        if (upstream == 0.0) continue;
        const auto zc = zn.row(c);
        const double cosv = dot(zc, rj) / norm;
        const double scale = upstream / (temperature * norm);
        for (std::size_t k = 0; k < d; ++k) gj[k] += scale * (zc[k] - cosv * rj[k] / norm);
      }
    }
  };
  side(bank.positive, grad.positive, g.positive);
  side(bank.negative, grad.negative, g.negative);
  return g;
}

/// Embedding bank plus its logit temperature.
struct EmbeddingHead {
  EmbeddingBank bank;
  double temperature = 0.02;

  std::size_t num_classes() const { return bank.num_classes(); }
  std::size_t channels() const { return bank.channels(); }

  SpatialLogits forward(const FeatureMap& z) const { return embedding_forward(bank, z, temperature); }

  std::vector<Tensor> backward(const FeatureMap& z, const SpatialLogits& grad) const {
    auto g = embedding_backward(bank, z, temperature, grad);
    std::vector<Tensor> out;
    if (bank.positive_mode != SideMode::kAnchorFrozen) out.push_back(std::move(g.positive));
    if (bank.negative_mode != SideMode::kAnchorFrozen) out.push_back(std::move(g.negative));
    return out;
  }

  /// Anchor-frozen sides are never exposed.
  std::vector<ParamRef> parameters() {
    std::vector<ParamRef> out;
    auto group = [](SideMode m) {
      return m == SideMode::kAnchorLearnable ? LrGroup::kPromptAnchor : LrGroup::kFreeEmbedding;
    };
    if (bank.positive_mode != SideMode::kAnchorFrozen) {
      out.push_back({"bank.positive", group(bank.positive_mode), &bank.positive});
    }
    if (bank.negative_mode != SideMode::kAnchorFrozen) {
      out.push_back({"bank.negative", group(bank.negative_mode), &bank.negative});
    }
    return out;
  }
};

static_assert(ScoringHead<ProjectorHead>);
static_assert(ScoringHead<EmbeddingHead>);

using AnyHead = std::variant<ProjectorHead, EmbeddingHead>;

}  // namespace mlrpa
