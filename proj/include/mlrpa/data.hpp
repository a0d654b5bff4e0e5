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

// Label matrices, partial-label masking, the ".mlt" tensor file format,
// class-embedding bank files and a synthetic dataset generator.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlrpa/errors.hpp"
#include "mlrpa/feature_map.hpp"
#include "mlrpa/numerics.hpp"

namespace mlrpa {

// ---------------------------------------------------------------------------
// Labels

/// Ternary label matrix: +1 present, -1 absent, 0 unknown.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t num_images, std::size_t num_classes, std::int8_t fill = -1)
      : images_(num_images), classes_(num_classes), entries_(num_images * num_classes, fill) {
    check_value(fill);
  }
  LabelMatrix(std::size_t num_images, std::size_t num_classes, std::vector<std::int8_t> entries)
      : images_(num_images), classes_(num_classes), entries_(std::move(entries)) {
    if (entries_.size() != images_ * classes_) {
      throw ShapeError("label matrix " + std::to_string(images_) + "x" +
                       std::to_string(classes_) + " needs " +
                       std::to_string(images_ * classes_) + " entries, got " +
                       std::to_string(entries_.size()));
    }
    for (auto v : entries_) check_value(v);
  }

  std::size_t num_images() const { return images_; }
  std::size_t num_classes() const { return classes_; }

  std::int8_t at(std::size_t image, std::size_t cls) const { return entries_[image * classes_ + cls]; }
  void set(std::size_t image, std::size_t cls, std::int8_t v) {
    check_value(v);
    entries_[image * classes_ + cls] = v;
  }
  std::span<const std::int8_t> row(std::size_t image) const {
    return std::span<const std::int8_t>(entries_).subspan(image * classes_, classes_);
  }
  std::span<const std::int8_t> entries() const { return entries_; }

  bool fully_annotated() const {
    return std::none_of(entries_.begin(), entries_.end(), [](auto v) { return v == 0; });
  }
  std::size_t known_count() const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [](auto v) { return v != 0; }));
  }

  LabelMatrix rows(std::size_t first, std::size_t count) const {
    std::vector<std::int8_t> out(entries_.begin() + first * classes_,
                                 entries_.begin() + (first + count) * classes_);
    return LabelMatrix(count, classes_, std::move(out));
  }

  bool operator==(const LabelMatrix&) const = default;

 private:
  static void check_value(std::int8_t v) {
    if (v != 1 && v != -1 && v != 0) {
      throw DomainError("label value " + std::to_string(v) + " is not one of {1,-1,0}");
    }
  }

  std::size_t images_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::int8_t> entries_;
};

struct MaskSpec {
  double known_fraction = 1.0;
  std::uint64_t seed = 0;
};

/// Keeps each (image, class) cell independently with probability p and
/// zeroes the rest. Draws come from stream 0 of `spec.seed` in row-major
/// cell order, one draw per cell.
inline LabelMatrix mask_labels(const LabelMatrix& full, const MaskSpec& spec) {
  if (!(spec.known_fraction > 0.0 && spec.known_fraction <= 1.0)) {
    throw DomainError("mask known_fraction must lie in (0, 1], got " +
                      std::to_string(spec.known_fraction));
  }
  if (!full.fully_annotated()) {
    throw DomainError("mask_labels requires a fully annotated matrix (found unknown entries)");
  }
  Rng rng(spec.seed);
  LabelMatrix out = full;
  for (std::size_t i = 0; i < full.num_images(); ++i) {
    for (std::size_t j = 0; j < full.num_classes(); ++j) {
      if (!rng.bernoulli(spec.known_fraction)) out.set(i, j, 0);
    }
  }
  return out;
}

// Label CSV: a header row of class names, then one row of integers per image.

inline std::vector<std::string> split_csv_simple(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline void write_label_csv(const std::filesystem::path& path, const LabelMatrix& labels,
                            const std::vector<std::string>& class_names) {
  if (class_names.size() != labels.num_classes()) {
    throw ShapeError("label csv: " + std::to_string(class_names.size()) + " names for " +
                     std::to_string(labels.num_classes()) + " classes");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  for (std::size_t j = 0; j < class_names.size(); ++j) {
    if (class_names[j].find_first_of(",\n") != std::string::npos) {
      throw FormatError("class name '" + class_names[j] + "' contains a comma or newline");
    }
    os << (j ? "," : "") << class_names[j];
  }
  os << "\n";
  for (std::size_t i = 0; i < labels.num_images(); ++i) {
    for (std::size_t j = 0; j < labels.num_classes(); ++j) {
      os << (j ? "," : "") << static_cast<int>(labels.at(i, j));
    }
    os << "\n";
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

struct LabelFile {
  LabelMatrix labels;
  std::vector<std::string> class_names;
};

inline LabelFile read_label_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open label file '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line)) throw FormatError(path.string() + ": missing header row");
  LabelFile out;
  out.class_names = split_csv_simple(line);
  const std::size_t n = out.class_names.size();
  std::vector<std::int8_t> entries;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_simple(line);
    if (fields.size() != n) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(n) + " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (f == "1" || f == "+1") entries.push_back(1);
      else if (f == "-1") entries.push_back(-1);
      else if (f == "0") entries.push_back(0);
      else throw FormatError(path.string() + ":" + std::to_string(lineno) + ": label '" + f +
                             "' is not one of {1,-1,0}");
    }
    ++rows;
  }
  out.labels = LabelMatrix(rows, n, std::move(entries));
  return out;
}

// ---------------------------------------------------------------------------
// ".mlt" tensor files
//
//   bytes 0-3   magic "MLT1"
//   byte  4     dtype code (1 = float32, 2 = float64)
//   byte  5     rank r
//   then r little-endian uint64 dims, then the row-major little-endian payload.

enum class Dtype : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

namespace detail {

template <typename U>
void put_le(std::string& buf, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

inline std::string read_all(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace detail

inline std::string encode_tensor(const Tensor& t, Dtype dtype = Dtype::kFloat64) {
  if (t.empty()) throw ShapeError("cannot encode an empty tensor");
  if (t.rank() > 255) throw ShapeError("tensor rank exceeds 255");
  std::string buf = "MLT1";
  buf.push_back(static_cast<char>(dtype));
  buf.push_back(static_cast<char>(t.rank()));
  for (std::size_t d : t.shape()) detail::put_le<std::uint64_t>(buf, d);
  for (double v : t.values()) {
    if (dtype == Dtype::kFloat64) {
      detail::put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(v));
    } else {
      detail::put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return buf;
}

inline Tensor decode_tensor(std::string_view bytes, const std::string& origin = "<memory>") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 6) throw FormatError(origin + ": header truncated (" + std::to_string(bytes.size()) + " bytes)");
  if (bytes.substr(0, 4) != "MLT1") throw FormatError(origin + ": bad magic, expected \"MLT1\"");
  const std::uint8_t code = p[4];
  std::size_t width;
  if (code == static_cast<std::uint8_t>(Dtype::kFloat32)) width = 4;
  else if (code == static_cast<std::uint8_t>(Dtype::kFloat64)) width = 8;
  else throw FormatError(origin + ": unsupported dtype code " + std::to_string(code));
  const std::size_t rank = p[5];
  if (rank == 0) throw FormatError(origin + ": rank must be at least 1");
  if (bytes.size() < 6 + 8 * rank) throw FormatError(origin + ": dims truncated");
  Shape shape(rank);
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    const auto d = detail::get_le<std::uint64_t>(p + 6 + 8 * i);
    if (d == 0) throw FormatError(origin + ": dims[" + std::to_string(i) + "] is zero");
    if (count > (std::uint64_t{1} << 48) / d) throw FormatError(origin + ": dims product overflows");
    shape[i] = static_cast<std::size_t>(d);
    count *= shape[i];
  }
  const std::size_t offset = 6 + 8 * rank;
  const std::size_t expected = count * width;
  if (bytes.size() - offset != expected) {
    throw FormatError(origin + ": payload length " + std::to_string(bytes.size() - offset) +
                      " bytes, shape " + shape_to_string(shape) + " needs " + std::to_string(expected));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* q = p + offset + i * width;
    values[i] = width == 8 ? std::bit_cast<double>(detail::get_le<std::uint64_t>(q))
                           : static_cast<double>(std::bit_cast<float>(detail::get_le<std::uint32_t>(q)));
    if (!std::isfinite(values[i])) {
      throw FormatError(origin + ": payload value " + std::to_string(i) + " is not finite");
    }
  }
  return Tensor(std::move(shape), std::move(values));
}

inline void write_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline void write_tensor_file(const Tensor& t, const std::filesystem::path& path,
                              Dtype dtype = Dtype::kFloat64) {
  write_bytes(path, encode_tensor(t, dtype));
}

inline Tensor read_tensor_file(const std::filesystem::path& path) {
  return decode_tensor(detail::read_all(path), path.string());
}

// ---------------------------------------------------------------------------
// Class-embedding banks: an N x d ".mlt" plus a sidecar of N class names,
// one per line, at the same path with the extension replaced by ".names".

struct EmbeddingBankFile {
  Tensor vectors;
  std::vector<std::string> class_names;
};

inline std::filesystem::path names_sidecar(const std::filesystem::path& bank_path) {
  auto p = bank_path;
  return p.replace_extension(".names");
}

inline void write_bank_file(const std::filesystem::path& path, const Tensor& vectors,
                            const std::vector<std::string>& class_names) {
  if (vectors.rank() != 2) throw ShapeError("bank must be rank 2 (N x d)");
  if (class_names.size() != vectors.dim(0)) {
    throw ShapeError("bank has " + std::to_string(vectors.dim(0)) + " rows but " +
                     std::to_string(class_names.size()) + " names");
  }
  write_tensor_file(vectors, path);
  std::ofstream os(names_sidecar(path), std::ios::binary);
  if (!os) throw IoError("cannot write sidecar for '" + path.string() + "'");
  for (const auto& n : class_names) os << n << "\n";
}

/// Reads a bank; the sidecar is optional, but when present its line count
/// must match the row count.
inline EmbeddingBankFile read_bank_file(const std::filesystem::path& path) {
  EmbeddingBankFile out{read_tensor_file(path), {}};
  if (out.vectors.rank() != 2) {
    throw FormatError(path.string() + ": bank must be rank 2, got shape " +
                      shape_to_string(out.vectors.shape()));
  }
  const auto sidecar = names_sidecar(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream is(sidecar);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) out.class_names.push_back(line);
    }
    if (out.class_names.size() != out.vectors.dim(0)) {
      throw FormatError(sidecar.string() + ": " + std::to_string(out.class_names.size()) +
                        " names for " + std::to_string(out.vectors.dim(0)) + " bank rows");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

/// Ground truth kept by the synthetic generator.
struct SyntheticTruth {
  Tensor concepts;                 // N x d unit vectors
  std::vector<long> planted_cell;  // M x N, flat cell index or -1
};

struct DatasetBundle {
  std::vector<FeatureMap> features;
  LabelMatrix labels;
  std::vector<std::string> class_names;
  Tensor anchors_positive;  // optional N x d text-side anchors
  Tensor anchors_negative;
  std::optional<SyntheticTruth> truth;

  std::size_t num_images() const { return features.size(); }
  std::size_t num_classes() const { return labels.num_classes(); }

  void validate() const {
    if (features.size() != labels.num_images()) {
      throw ShapeError("dataset has " + std::to_string(features.size()) + " feature maps but " +
                       std::to_string(labels.num_images()) + " label rows");
    }
    if (!class_names.empty() && class_names.size() != labels.num_classes()) {
      throw ShapeError("dataset has " + std::to_string(class_names.size()) + " class names but " +
                       std::to_string(labels.num_classes()) + " label columns");
    }
    for (const auto& f : features) {
      if (f.tensor().shape() != features.front().tensor().shape()) {
        throw ShapeError("feature maps disagree in shape: " +
                         shape_to_string(features.front().tensor().shape()) + " vs " +
                         shape_to_string(f.tensor().shape()));
      }
    }
  }
};

/// Packs feature maps into one M x H x W x d tensor.
inline Tensor stack_features(const std::vector<FeatureMap>& maps) {
  if (maps.empty()) throw ShapeError("no feature maps to stack");
  const auto& s = maps.front().tensor().shape();
  std::vector<double> values;
  values.reserve(maps.size() * maps.front().tensor().size());
  for (const auto& m : maps) {
    if (m.tensor().shape() != s) throw ShapeError("feature maps disagree in shape");
    values.insert(values.end(), m.tensor().values().begin(), m.tensor().values().end());
  }
  return Tensor({maps.size(), s[0], s[1], s[2]}, std::move(values));
}

inline std::vector<FeatureMap> unstack_features(const Tensor& stacked) {
  if (stacked.rank() != 4) {
    throw ShapeError("stacked features must be rank 4 (M x H x W x d), got " +
                     shape_to_string(stacked.shape()));
  }
  const Shape per{stacked.dim(1), stacked.dim(2), stacked.dim(3)};
  const std::size_t n = shape_product(per);
  std::vector<FeatureMap> out;
  out.reserve(stacked.dim(0));
  for (std::size_t i = 0; i < stacked.dim(0); ++i) {
    auto first = stacked.values().begin() + static_cast<std::ptrdiff_t>(i * n);
    out.emplace_back(Tensor(per, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n))));
  }
  return out;
}

/// Loads features from either a rank-4 ".mlt" or a JSON index
/// {"files": [...]} of per-image rank-3 ".mlt" files (paths relative to the index).
inline std::vector<FeatureMap> read_features(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    nlohmann::json index;
    try {
      index = nlohmann::json::parse(detail::read_all(path));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    if (!index.contains("files") || !index["files"].is_array()) {
      throw FormatError(path.string() + ": missing \"files\" array");
    }
    std::vector<FeatureMap> out;
    for (const auto& f : index["files"]) {
      auto p = std::filesystem::path(f.get<std::string>());
      if (p.is_relative()) p = path.parent_path() / p;
      out.emplace_back(read_tensor_file(p));
    }
    return out;
  }
  return unstack_features(read_tensor_file(path));
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
  std::size_t num_images = 64;
  std::size_t num_classes = 4;
  std::size_t height = 3;
  std::size_t width = 3;
  std::size_t dim = 16;
  std::uint64_t seed = 0;
  double noise = 0.1;             // planted-cell perturbation scale
  double presence = 0.3;          // per-class presence probability
  double background_scale = 1.0;  // expected norm of the background noise
  double background_offset = 1.0;  // length of the shared background direction
  double anchor_noise = 0.5;      // positive anchor perturbation scale
  double negative_anchor_mix = 0.6;  // cosine of negative anchor with its concept
};

namespace detail {

inline std::vector<double> random_unit(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  do {
    for (double& x : v) x = rng.normal();
  } while (!(l2_norm(v) > 0.0));
  return l2_normalize(v);
}

}  // namespace detail

/// Plants one random unit concept vector per class into random cells.
///
/// Each image draws its present classes independently with probability
/// `presence` (at most H*W of them, one per cell). A present class's concept
/// plus `noise` * N(0, I/d) is written to a distinct random cell; all other
/// cells are background_offset * u + N(0, background_scale^2 I/d), where u is
/// one random unit direction shared by every image (frozen-encoder features
/// are not zero-mean). Random streams: 0 for concepts and u, 1 for anchors,
/// 2 + i for image i.
inline DatasetBundle generate_synthetic(const SynthSpec& spec) {
  if (spec.num_images < 1 || spec.height < 1 || spec.width < 1 || spec.dim < 1) {
    throw DomainError("synthetic dataset dims must be >= 1");
  }
  if (spec.num_classes < 2) throw DomainError("synthetic dataset needs at least 2 classes");
  const std::size_t n = spec.num_classes;
  const std::size_t d = spec.dim;
  const std::size_t cells = spec.height * spec.width;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  Rng concept_rng(spec.seed, 0);
  std::vector<double> concepts;
  for (std::size_t j = 0; j < n; ++j) {
    auto v = detail::random_unit(concept_rng, d);
    concepts.insert(concepts.end(), v.begin(), v.end());
  }

  const auto common = detail::random_unit(concept_rng, d);

  Rng anchor_rng(spec.seed, 1);
  std::vector<double> pos_anchor, neg_anchor;
  const double mix = spec.negative_anchor_mix;
  for (std::size_t j = 0; j < n; ++j) {
    std::span<const double> c(concepts.data() + j * d, d);
    std::vector<double> p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = c[k] + spec.anchor_noise * anchor_rng.normal() * inv_sqrt_d;
    p = l2_normalize(p);
    pos_anchor.insert(pos_anchor.end(), p.begin(), p.end());
    // Orthogonal complement direction so the cosine with the concept is exactly `mix`.
    auto u = detail::random_unit(anchor_rng, d);
    const double proj = dot(u, c);
    for (std::size_t k = 0; k < d; ++k) u[k] -= proj * c[k];
    u = l2_normalize(u);
    const double ortho = std::sqrt(std::max(0.0, 1.0 - mix * mix));
    for (std::size_t k = 0; k < d; ++k) neg_anchor.push_back(mix * c[k] + ortho * u[k]);
  }

  DatasetBundle out;
  out.labels = LabelMatrix(spec.num_images, n, std::int8_t{-1});
  SyntheticTruth truth{Tensor({n, d}, concepts), std::vector<long>(spec.num_images * n, -1)};
  for (std::size_t j = 0; j < n; ++j) out.class_names.push_back("class" + std::to_string(j));

  for (std::size_t i = 0; i < spec.num_images; ++i) {
    Rng rng(spec.seed, 2 + i);
    std::vector<std::size_t> present;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.bernoulli(spec.presence)) present.push_back(j);
    }
    shuffle(present, rng);
    if (present.size() > cells) present.resize(cells);
    std::vector<std::size_t> cell_order(cells);
    std::iota(cell_order.begin(), cell_order.end(), std::size_t{0});
    shuffle(cell_order, rng);

    FeatureMap fm(spec.height, spec.width, d);
    for (std::size_t c = 0; c < cells; ++c) {
      auto v = fm.cell(c);
      for (std::size_t t = 0; t < d; ++t) {
        v[t] = spec.background_offset * common[t] + spec.background_scale * rng.normal() * inv_sqrt_d;
      }
    }
    for (std::size_t k = 0; k < present.size(); ++k) {
      const std::size_t j = present[k];
      const std::size_t c = cell_order[k];
      auto v = fm.cell(c);
      for (std::size_t t = 0; t < d; ++t) {
        v[t] = concepts[j * d + t] + spec.noise * rng.normal() * inv_sqrt_d;
      }
      out.labels.set(i, j, 1);
      truth.planted_cell[i * n + j] = static_cast<long>(c);
    }
    out.features.push_back(std::move(fm));
  }
  out.anchors_positive = Tensor({n, d}, std::move(pos_anchor));
  out.anchors_negative = Tensor({n, d}, std::move(neg_anchor));
  out.truth = std::move(truth);
  return out;
}

/// Splits off the first `count` images; the remainder forms the second bundle.
inline std::pair<DatasetBundle, DatasetBundle> split_bundle(const DatasetBundle& b, std::size_t count) {
  if (count == 0 || count >= b.num_images()) {
    throw DomainError("split point must leave both parts nonempty");
  }
  auto part = [&](std::size_t first, std::size_t len) {
    DatasetBundle out;
    out.features.assign(b.features.begin() + static_cast<std::ptrdiff_t>(first),
                        b.features.begin() + static_cast<std::ptrdiff_t>(first + len));
    out.labels = b.labels.rows(first, len);
    out.class_names = b.class_names;
    out.anchors_positive = b.anchors_positive;
    out.anchors_negative = b.anchors_negative;
    return out;
  };
  return {part(0, count), part(count, b.num_images() - count)};
}

}  // namespace mlrpa
