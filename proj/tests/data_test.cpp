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
#include <limits>

#include "mlrpa/data.hpp"
#include "oracles.hpp"

namespace mlrpa {
namespace {

using testing::scratch_dir;
using testing::slurp;

LabelMatrix random_full(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabelMatrix out(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.set(i, j, rng.bernoulli(0.3) ? 1 : -1);
  return out;
}

TEST(MaskLabels, FullKnownFractionIsIdentity) {
  const auto full = random_full(30, 7, 1);
  EXPECT_EQ(mask_labels(full, {1.0, 99}), full);
}

TEST(MaskLabels, BinomialCountAndDeterminism) {
  const auto full = random_full(80, 20, 2);
  const auto a = mask_labels(full, {0.5, 7});
  const auto b = mask_labels(full, {0.5, 7});
  EXPECT_EQ(a, b);
  // sigma = sqrt(1600 * 0.25) = 20
  EXPECT_GE(a.known_count(), 800u - 80u);
  EXPECT_LE(a.known_count(), 800u + 80u);
}

TEST(MaskLabels, KeepsSignsAndHitsExpectedFraction) {
  const auto full = random_full(200, 60, 3);  // 12000 cells
  for (double p : {0.1, 0.3, 0.5, 0.9}) {
    const auto masked = mask_labels(full, {p, 11});
    for (std::size_t i = 0; i < full.num_images(); ++i)
      for (std::size_t j = 0; j < full.num_classes(); ++j)
        if (masked.at(i, j) != 0) {
          ASSERT_EQ(masked.at(i, j), full.at(i, j));
        }
    const double cells = 12000.0;
    const double sigma = std::sqrt(cells * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(masked.known_count()), cells * p, 4 * sigma) << "p=" << p;
  }
}

TEST(MaskLabels, RejectsPartialInputAndBadFraction) {
  auto partial = random_full(4, 3, 4);
  partial.set(1, 1, 0);
  EXPECT_THROW(mask_labels(partial, {0.5, 1}), DomainError);
  const auto full = random_full(4, 3, 4);
  EXPECT_THROW(mask_labels(full, {0.0, 1}), DomainError);
  EXPECT_THROW(mask_labels(full, {1.5, 1}), DomainError);
}

TEST(TensorFile, RoundTrip2x3) {
  const auto dir = scratch_dir("tf_roundtrip");
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  write_tensor_file(t, dir / "t.mlt");
  const Tensor back = read_tensor_file(dir / "t.mlt");
  EXPECT_TRUE(back.bitwise_equal(t));
}

TEST(TensorFile, HeaderLayout) {
  const std::string bytes = encode_tensor(Tensor({1, 2}, {1.0, 2.0}));
  ASSERT_EQ(bytes.size(), 6u + 16u + 16u);
  EXPECT_EQ(bytes.substr(0, 4), "MLT1");
  EXPECT_EQ(bytes[4], 2);
  EXPECT_EQ(bytes[5], 2);
  EXPECT_EQ(bytes[6], 1);   // dims[0] = 1, little-endian
  EXPECT_EQ(bytes[14], 2);  // dims[1] = 2
  // 1.0 = 0x3FF0000000000000, little-endian: last payload byte of the first value is 0x3F.
  EXPECT_EQ(static_cast<unsigned char>(bytes[22 + 7]), 0x3F);
}

TEST(TensorFile, Float32IsWidened) {
  // Hand-built float32 file holding [0.5] = 0x3F000000.
  std::string bytes = "MLT1";
  bytes += '\x01';
  bytes += '\x01';
  bytes += std::string("\x01\0\0\0\0\0\0\0", 8);
  bytes += std::string("\0\0\0\x3F", 4);
  const Tensor t = decode_tensor(bytes);
  ASSERT_EQ(t.shape(), Shape{1});
  EXPECT_EQ(t[0], 0.5);
  // And the library's own float32 writer round-trips representable values.
  const Tensor v({3}, {0.25, -1.5, 1024.0});
  EXPECT_TRUE(decode_tensor(encode_tensor(v, Dtype::kFloat32)).bitwise_equal(v));
}

TEST(TensorFile, FormatErrorsNameTheField) {
  std::string good = encode_tensor(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  auto expect_error = [](const std::string& bytes, const std::string& field) {
    try {
      decode_tensor(bytes);
      FAIL() << "expected FormatError mentioning " << field;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_error(good.substr(0, good.size() - 3), "payload length");
  expect_error(good + "x", "payload length");
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  expect_error(bad_magic, "magic");
  std::string bad_dtype = good;
  bad_dtype[4] = 7;
  expect_error(bad_dtype, "dtype");
  expect_error(good.substr(0, 10), "dims");
  expect_error("MLT", "header");
  std::string zero_dim = good;
  zero_dim[6] = 0;
  expect_error(zero_dim, "dims[0]");
}

TEST(TensorFile, RoundTripIsIdentityForFiniteValues) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    Shape shape(1 + rng.uniform_index(4));
    for (auto& d : shape) d = 1 + rng.uniform_index(4);
    std::vector<double> values(shape_product(shape));
    for (auto& v : values) {
      switch (rng.uniform_index(4)) {
        case 0: v = rng.normal(); break;
        case 1: v = std::ldexp(rng.normal(), static_cast<int>(rng.uniform_index(2000)) - 1000); break;
        case 2: v = std::numeric_limits<double>::denorm_min() * static_cast<double>(rng.uniform_index(100)); break;
        default: v = rng.bernoulli(0.5) ? std::numeric_limits<double>::max() : -0.0; break;
      }
    }
    const Tensor x(shape, values);
    EXPECT_TRUE(decode_tensor(encode_tensor(x)).bitwise_equal(x));
  }
}

TEST(TensorFile, MissingFileIsIoError) {
  EXPECT_THROW(read_tensor_file("/nonexistent/dir/x.mlt"), IoError);
}

TEST(LabelCsv, RoundTripAndErrors) {
  const auto dir = scratch_dir("labels");
  LabelMatrix m(2, 3, std::vector<std::int8_t>{1, -1, 0, 0, 1, -1});
  write_label_csv(dir / "l.csv", m, {"cat", "dog", "person"});
  EXPECT_EQ(slurp(dir / "l.csv"), "cat,dog,person\n1,-1,0\n0,1,-1\n");
  const auto back = read_label_csv(dir / "l.csv");
  EXPECT_EQ(back.labels, m);
  EXPECT_EQ(back.class_names, (std::vector<std::string>{"cat", "dog", "person"}));

  write_bytes(dir / "bad.csv", "a,b\n1,2\n");
  EXPECT_THROW(read_label_csv(dir / "bad.csv"), FormatError);
  write_bytes(dir / "short.csv", "a,b\n1\n");
  EXPECT_THROW(read_label_csv(dir / "short.csv"), FormatError);
}

TEST(BankFile, SidecarRoundTripAndMismatch) {
  const auto dir = scratch_dir("bank");
  const Tensor v({2, 3}, {1, 0, 0, 0, 1, 0});
  write_bank_file(dir / "p1.mlt", v, {"cat", "dog"});
  EXPECT_TRUE(std::filesystem::exists(dir / "p1.names"));
  const auto back = read_bank_file(dir / "p1.mlt");
  EXPECT_TRUE(back.vectors.bitwise_equal(v));
  EXPECT_EQ(back.class_names, (std::vector<std::string>{"cat", "dog"}));
  write_bytes(dir / "p1.names", "cat\n");
  EXPECT_THROW(read_bank_file(dir / "p1.mlt"), FormatError);
  EXPECT_THROW(write_bank_file(dir / "x.mlt", v, {"only"}), ShapeError);
}

TEST(Features, StackedAndIndexedLoading) {
  const auto dir = scratch_dir("features");
  SynthSpec s;
  s.num_images = 3;
  s.num_classes = 2;
  s.height = 2;
  s.width = 2;
  s.dim = 4;
  const auto b = generate_synthetic(s);
  write_tensor_file(stack_features(b.features), dir / "stack.mlt");
  const auto a = read_features(dir / "stack.mlt");
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(a[i].tensor().bitwise_equal(b.features[i].tensor()));

  nlohmann::json index;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string name = "img" + std::to_string(i) + ".mlt";
    write_tensor_file(b.features[i].tensor(), dir / name, Dtype::kFloat64);
    index["files"].push_back(name);
  }
  write_bytes(dir / "index.json", index.dump());
  const auto c = read_features(dir / "index.json");
  ASSERT_EQ(c.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(c[i].tensor().bitwise_equal(b.features[i].tensor()));
}

TEST(Synthetic, ShapeContract) {
  SynthSpec s;
  s.num_images = 4;
  s.num_classes = 2;
  s.height = 1;
  s.width = 1;
  s.dim = 8;
  s.seed = 1;
  const auto b = generate_synthetic(s);
  ASSERT_EQ(b.features.size(), 4u);
  for (const auto& f : b.features) EXPECT_EQ(f.tensor().shape(), (Shape{1, 1, 8}));
  EXPECT_EQ(b.labels.num_images(), 4u);
  EXPECT_EQ(b.labels.num_classes(), 2u);
  EXPECT_TRUE(b.labels.fully_annotated());
  EXPECT_NO_THROW(b.validate());
  // One cell holds at most one concept.
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE((b.labels.at(i, 0) == 1) + (b.labels.at(i, 1) == 1), 1);
}

TEST(Synthetic, NoiselessPlantedCellMatchesConcept) {
  SynthSpec s;
  s.num_images = 20;
  s.num_classes = 3;
  s.dim = 12;
  s.noise = 0.0;
  s.seed = 5;
  const auto b = generate_synthetic(s);
  const auto& truth = *b.truth;
  int planted = 0;
  for (std::size_t i = 0; i < s.num_images; ++i) {
    for (std::size_t j = 0; j < s.num_classes; ++j) {
      const long c = truth.planted_cell[i * s.num_classes + j];
      EXPECT_EQ(c >= 0, b.labels.at(i, j) == 1);
      if (c < 0) continue;
      ++planted;
      EXPECT_NEAR(cosine_similarity(b.features[i].cell(static_cast<std::size_t>(c)), truth.concepts.row(j)), 1.0,
                  1e-12);
    }
  }
  EXPECT_GT(planted, 0);
}

TEST(Synthetic, DeterministicAndAnchorsShaped) {
  SynthSpec s;
  s.seed = 8;
  const auto a = generate_synthetic(s);
  const auto b = generate_synthetic(s);
  EXPECT_EQ(a.labels, b.labels);
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    EXPECT_TRUE(a.features[i].tensor().bitwise_equal(b.features[i].tensor()));
  }
  EXPECT_EQ(a.anchors_positive.shape(), (Shape{s.num_classes, s.dim}));
  // Negative anchors sit at the configured cosine from their concept.
  for (std::size_t j = 0; j < s.num_classes; ++j) {
    EXPECT_NEAR(cosine_similarity(a.anchors_negative.row(j), a.truth->concepts.row(j)), s.negative_anchor_mix, 1e-12);
  }
  EXPECT_THROW(generate_synthetic({.num_images = 4, .num_classes = 1}), DomainError);
}

TEST(Synthetic, SplitKeepsOrder) {
  SynthSpec s;
  s.num_images = 10;
  const auto b = generate_synthetic(s);
  const auto [tr, te] = split_bundle(b, 7);
  EXPECT_EQ(tr.num_images(), 7u);
  EXPECT_EQ(te.num_images(), 3u);
  EXPECT_TRUE(te.features[0].tensor().bitwise_equal(b.features[7].tensor()));
  EXPECT_EQ(te.labels.row(0)[0], b.labels.at(7, 0));
  EXPECT_THROW(split_bundle(b, 10), DomainError);
}

TEST(DatasetBundle, ValidateCatchesMismatch) {
  DatasetBundle b;
  b.features.emplace_back(1, 1, 2);
  b.labels = LabelMatrix(2, 2);
  EXPECT_THROW(b.validate(), ShapeError);
  b.features.emplace_back(1, 2, 2);
  EXPECT_THROW(b.validate(), ShapeError);
}

}  // namespace
}  // namespace mlrpa
