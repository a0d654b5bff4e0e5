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

#include <gtest/gtest.h>

#include <cmath>

#include "mlrpa/heads.hpp"
#include "oracles.hpp"

namespace mlrpa {
namespace {

FeatureMap random_map(std::size_t h, std::size_t w, std::size_t d, Rng& rng) {
  FeatureMap z(h, w, d);
  for (double& v : z.tensor().values()) v = rng.normal();
  return z;
}

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t({r, c});
  for (double& v : t.values()) v = rng.normal();
  return t;
}

TEST(Projector, ZeroWeightsGiveBias) {
  ProjectorHead head{Tensor({4, 3}), Tensor({4}, {1, 2, 3, 4}), true};
  Rng rng(1);
  const auto a = head.forward(random_map(2, 2, 3, rng));
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(a.positive[c * 2 + 0], 1.0);
    EXPECT_EQ(a.negative[c * 2 + 0], 2.0);
    EXPECT_EQ(a.positive[c * 2 + 1], 3.0);
    EXPECT_EQ(a.negative[c * 2 + 1], 4.0);
  }
}

TEST(Projector, IdentityPassesFeaturesThrough) {
  // N = 1, d = 2: positive row picks channel 0, negative row channel 1.
  ProjectorHead head{Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2}), false};
  const FeatureMap z(Tensor({1, 2, 2}, {0.5, -1, 3, 7}));
  const auto a = head.forward(z);
  EXPECT_EQ(a.positive.values()[0], 0.5);
  EXPECT_EQ(a.negative.values()[0], -1.0);
  EXPECT_EQ(a.positive.values()[1], 3.0);
  EXPECT_EQ(a.negative.values()[1], 7.0);
}

TEST(Projector, MatchesElementwiseOracle) {
  Rng rng(2);
  const auto head = make_projector(3, 5, 9);
  const auto z = random_map(2, 3, 5, rng);
  const auto a = head.forward(z);
  for (std::size_t h = 0; h < 2; ++h) {
    for (std::size_t w = 0; w < 3; ++w) {
      for (std::size_t j = 0; j < 3; ++j) {
        for (int side = 0; side < 2; ++side) {
          double expect = head.bias[2 * j + side];
          for (std::size_t k = 0; k < 5; ++k) {
            expect += head.weight[(2 * j + side) * 5 + k] * z.tensor()[(h * 3 + w) * 5 + k];
          }
          const double got = (side == 0 ? a.positive : a.negative)[(h * 3 + w) * 3 + j];
          EXPECT_NEAR(got, expect, 1e-12);
        }
      }
    }
  }
}

TEST(Projector, LinearInFeaturesWithoutBias) {
  Rng rng(3);
  const auto head = make_projector(2, 4, 1, false);
  const auto z1 = random_map(2, 2, 4, rng);
  const auto z2 = random_map(2, 2, 4, rng);
  const double alpha = 1.7, beta = -0.4;
  FeatureMap mix(2, 2, 4);
  for (std::size_t i = 0; i < mix.tensor().size(); ++i) {
    mix.tensor()[i] = alpha * z1.tensor()[i] + beta * z2.tensor()[i];
  }
  const auto a1 = head.forward(z1), a2 = head.forward(z2), am = head.forward(mix);
  for (std::size_t i = 0; i < am.positive.size(); ++i) {
    EXPECT_NEAR(am.positive[i], alpha * a1.positive[i] + beta * a2.positive[i], 1e-12);
    EXPECT_NEAR(am.negative[i], alpha * a1.negative[i] + beta * a2.negative[i], 1e-12);
  }
}

TEST(Projector, InitBoundsAndErrors) {
  auto head = make_projector(4, 16, 3);
  for (double v : head.weight.values()) EXPECT_LE(std::abs(v), 0.25);
  EXPECT_EQ(head.weight.shape(), (Shape{8, 16}));
  EXPECT_EQ(head.parameters().size(), 2u);
  Rng rng(4);
  EXPECT_THROW(head.forward(random_map(1, 1, 15, rng)), ShapeError);
  EXPECT_THROW(make_projector(0, 4, 1), DomainError);
  auto no_bias = make_projector(2, 4, 1, false);
  EXPECT_EQ(no_bias.parameters().size(), 1u);
}

TEST(Embedding, SelfSimilarityIsInverseTemperature) {
  Rng rng(5);
  const Tensor r = random_matrix(2, 6, rng);
  EmbeddingHead head{make_bank(2, 6, SideMode::kAnchorFrozen, SideMode::kAnchorFrozen, r, r, 0), 0.02};
  // Cell 0 equals class 0's vector scaled by 3; cell 1 equals class 1's vector.
  FeatureMap z(1, 2, 6);
  for (std::size_t k = 0; k < 6; ++k) {
    z.cell(0)[k] = 3.0 * r.row(0)[k];
    z.cell(1)[k] = r.row(1)[k];
  }
  const auto a = head.forward(z);
  EXPECT_NEAR(a.positive[0 * 2 + 0], 50.0, 1e-12);
  EXPECT_NEAR(a.positive[1 * 2 + 1], 50.0, 1e-12);
}

TEST(Embedding, OrthogonalGivesZero) {
  const Tensor r({1, 2}, {1, 0});
  EmbeddingHead head{make_bank(1, 2, SideMode::kAnchorFrozen, SideMode::kAnchorFrozen, r, r, 0), 0.1};
  const auto a = head.forward(FeatureMap(Tensor({1, 1, 2}, {0, 5})));
  EXPECT_EQ(a.positive[0], 0.0);
  EXPECT_EQ(a.negative[0], 0.0);
}

TEST(Embedding, MatchesCosineOracleAndBound) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto bank = make_free_dual(3, 7, static_cast<std::uint64_t>(trial));
    const double tau = 0.05 + rng.uniform();
    const auto z = random_map(2, 2, 7, rng);
    const auto a = embedding_forward(bank, z, tau);
    for (std::size_t c = 0; c < 4; ++c) {
      const auto x = z.cell(c);
      for (std::size_t j = 0; j < 3; ++j) {
        const auto rp = bank.positive.row(j);
        const auto rn = bank.negative.row(j);
        const double cp = dot(x, rp) / (l2_norm(x) * l2_norm(rp));
        const double cn = dot(x, rn) / (l2_norm(x) * l2_norm(rn));
        EXPECT_NEAR(a.positive[c * 3 + j], cp / tau, 1e-12 / tau);
        EXPECT_NEAR(a.negative[c * 3 + j], cn / tau, 1e-12 / tau);
        EXPECT_LE(std::abs(a.positive[c * 3 + j]), 1.0 / tau + 1e-12);
      }
    }
  }
}

TEST(Embedding, InvariantToPositiveRescaling) {
  Rng rng(7);
  auto bank = make_free_dual(2, 5, 1);
  const auto z = random_map(2, 2, 5, rng);
  const auto a = embedding_forward(bank, z, 0.02);
  FeatureMap z2 = z;
  for (double& v : z2.tensor().values()) v *= 4.5;
  for (double& v : bank.positive.values()) v *= 0.01;
  for (double& v : bank.negative.values()) v *= 300.0;
  const auto b = embedding_forward(bank, z2, 0.02);
  for (std::size_t i = 0; i < a.positive.size(); ++i) {
    EXPECT_NEAR(a.positive[i], b.positive[i], 1e-10);
    EXPECT_NEAR(a.negative[i], b.negative[i], 1e-10);
  }
}

TEST(Embedding, ZeroCellIsDegenerate) {
  auto bank = make_free_dual(1, 3, 1);
  EXPECT_THROW(embedding_forward(bank, FeatureMap(1, 1, 3), 0.02), DegenerateInputError);
  EXPECT_THROW(embedding_forward(bank, FeatureMap(Tensor({1, 1, 3}, 1.0)), 0.0), DomainError);
}

TEST(Banks, PositiveCoopInitAndGroups) {
  Rng rng(8);
  const Tensor anchors = random_matrix(5, 12, rng);
  EmbeddingHead head{make_positivecoop(anchors, 12, 3)};
  EXPECT_TRUE(head.bank.positive.bitwise_equal(anchors));
  for (std::size_t j = 0; j < 5; ++j) {
    const double n = l2_norm(head.bank.negative.row(j));
    EXPECT_GT(n, 0.1);
    EXPECT_LE(n, 0.2 + 1e-15);
  }
  const auto params = head.parameters();
  ASSERT_EQ(params.size(), 2u);
  EXPECT_EQ(params[0].group, LrGroup::kPromptAnchor);
  EXPECT_EQ(params[1].group, LrGroup::kFreeEmbedding);
}

TEST(Banks, NegativeCoopMirrorsPositiveCoop) {
  Rng rng(9);
  const Tensor anchors = random_matrix(4, 10, rng);
  const auto pos = make_positivecoop(anchors, 10, 17);
  const auto neg = make_negativecoop(anchors, 10, 17);
  EXPECT_TRUE(neg.negative.bitwise_equal(anchors));
  EXPECT_TRUE(neg.positive.bitwise_equal(pos.negative));
  EXPECT_EQ(neg.positive_mode, SideMode::kFreeLearnable);
  EXPECT_EQ(neg.negative_mode, SideMode::kAnchorLearnable);
}

TEST(Banks, DeterministicPerSeed) {
  const auto a = make_free_dual(6, 8, 42);
  const auto b = make_free_dual(6, 8, 42);
  const auto c = make_free_dual(6, 8, 43);
  EXPECT_TRUE(a.positive.bitwise_equal(b.positive));
  EXPECT_TRUE(a.negative.bitwise_equal(b.negative));
  EXPECT_FALSE(a.positive.bitwise_equal(c.positive));
  EXPECT_FALSE(a.positive.bitwise_equal(a.negative));
}

TEST(Banks, FrozenSidesAreNotParameters) {
  Rng rng(10);
  const Tensor anchors = random_matrix(3, 4, rng);
  EmbeddingHead head{make_bank(3, 4, SideMode::kAnchorFrozen, SideMode::kFreeLearnable, anchors, Tensor(), 1)};
  const auto params = head.parameters();
  ASSERT_EQ(params.size(), 1u);
  EXPECT_EQ(params[0].tensor, &head.bank.negative);
  SpatialLogits g(1, 1, 3);
  g.positive[0] = 1.0;
  g.negative[1] = 1.0;
  EXPECT_EQ(head.backward(FeatureMap(Tensor({1, 1, 4}, 1.0)), g).size(), 1u);
}

TEST(Banks, DimensionErrors) {
  Rng rng(11);
  const Tensor anchors = random_matrix(3, 4, rng);
  EXPECT_THROW(make_positivecoop(anchors, 5, 1), ShapeError);
  EXPECT_THROW(make_bank(3, 4, SideMode::kAnchorLearnable, SideMode::kFreeLearnable, Tensor(), Tensor(), 1),
               ShapeError);
  auto bank = make_positivecoop(anchors, 4, 1);
  EXPECT_THROW(embedding_forward(bank, random_map(2, 2, 5, rng), 0.02), ShapeError);
  EXPECT_THROW(parse_side_mode("frozen"), DomainError);
  for (auto m : {SideMode::kAnchorFrozen, SideMode::kAnchorLearnable, SideMode::kFreeLearnable}) {
    EXPECT_EQ(parse_side_mode(side_mode_name(m)), m);
  }
}

// Each backward against central differences of a random linear functional of the logits.
template <typename Head>
void check_head_gradient(Head head, const FeatureMap& z, Rng& rng) {
  const auto a0 = head.forward(z);
  SpatialLogits w(a0.height(), a0.width(), a0.num_classes());
  for (double& v : w.positive.values()) v = rng.normal();
  for (double& v : w.negative.values()) v = rng.normal();
  auto f = [&] {
    const auto a = head.forward(z);
    return dot(a.positive.values(), w.positive.values()) + dot(a.negative.values(), w.negative.values());
  };
  const auto grads = head.backward(z, w);
  auto params = head.parameters();
  ASSERT_EQ(grads.size(), params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].tensor->size(); ++i) {
      const double fd = testing::central_difference(f, (*params[p].tensor)[i], 1e-6);
      EXPECT_LT(testing::relative_error(grads[p][i], fd), 1e-5) << params[p].name << "[" << i << "]";
    }
  }
}

TEST(HeadGradients, MatchFiniteDifferences) {
  Rng rng(12);
  const auto z = random_map(2, 2, 4, rng);
  check_head_gradient(make_projector(3, 4, 5), z, rng);
  check_head_gradient(EmbeddingHead{make_free_dual(3, 4, 6), 0.5}, z, rng);
  check_head_gradient(EmbeddingHead{make_positivecoop(random_matrix(3, 4, rng), 4, 7), 0.3}, z, rng);
}

}  // namespace
}  // namespace mlrpa
