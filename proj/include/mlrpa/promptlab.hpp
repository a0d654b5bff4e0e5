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

// Cosine-similarity statistics between class-embedding banks, e.g. between
// "photo of a {}" and "not a photo of a {}" prompt embeddings.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlrpa/data.hpp"
#include "mlrpa/errors.hpp"
#include "mlrpa/numerics.hpp"

namespace mlrpa {

/// Summary of a set of cosine similarities; std is the population (1/n) form.
struct SimilarityStats {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline SimilarityStats summarize(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("no similarity values to summarize");
  SimilarityStats s;
  s.count = values.size();
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

/// cos(a[j], b[j]) for every class j.
inline std::vector<double> rowwise_cosines(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || a.shape() != b.shape()) {
    throw ShapeError("banks must share an N x d shape, got " + shape_to_string(a.shape()) + " and " +
                     shape_to_string(b.shape()));
  }
  std::vector<double> out(a.dim(0));
  for (std::size_t j = 0; j < a.dim(0); ++j) {
    try {
      out[j] = cosine_similarity(a.row(j), b.row(j));
    } catch (const DegenerateInputError&) {
      throw DegenerateInputError("bank row " + std::to_string(j) + " has zero norm");
    }
  }
  return out;
}

inline SimilarityStats pairwise_stats(const Tensor& bank_a, const Tensor& bank_b) {
  return summarize(rowwise_cosines(bank_a, bank_b));
}

enum class SweepAggregation {
  kPooled,     // statistics over all N x T class-template cosines
  kClassMean,  // average each class over templates, then statistics over N classes
};

inline SweepAggregation parse_sweep_aggregation(std::string_view s) {
  if (s == "pooled") return SweepAggregation::kPooled;
  if (s == "class-mean") return SweepAggregation::kClassMean;
  throw DomainError("unknown aggregation '" + std::string(s) + "' (expected pooled or class-mean)");
}

struct SweepStats {
  SimilarityStats p1_n1;
  SimilarityStats p1_p2;
};

inline SimilarityStats sweep_side(const std::vector<Tensor>& first, const std::vector<Tensor>& second,
                                  SweepAggregation agg) {
  if (first.empty() || first.size() != second.size()) {
    throw ShapeError("template lists must be nonempty and equally long (" + std::to_string(first.size()) +
                     " vs " + std::to_string(second.size()) + ")");
  }
  std::vector<double> pooled;
  std::vector<double> class_sum;
  for (std::size_t t = 0; t < first.size(); ++t) {
    if (first[t].shape() != first.front().shape()) throw ShapeError("template banks differ in shape");
    const auto c = rowwise_cosines(first[t], second[t]);
    pooled.insert(pooled.end(), c.begin(), c.end());
    if (class_sum.empty()) class_sum.assign(c.size(), 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) class_sum[j] += c[j];
  }
  if (agg == SweepAggregation::kPooled) return summarize(pooled);
  for (double& v : class_sum) v /= static_cast<double>(first.size());
  return summarize(class_sum);
}

/// Per-template banks for P1, N1 and P2 prompts (same template order).
inline SweepStats template_sweep_stats(const std::vector<Tensor>& banks_p1, const std::vector<Tensor>& banks_n1,
                                       const std::vector<Tensor>& banks_p2,
                                       SweepAggregation agg = SweepAggregation::kPooled) {
  return {sweep_side(banks_p1, banks_n1, agg), sweep_side(banks_p1, banks_p2, agg)};
}

inline nlohmann::json to_json(const SimilarityStats& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

/// Sweep manifest: {"p1": [...], "n1": [...], "p2": [...], "aggregation": "pooled"}.
/// Bank paths are relative to the manifest.
struct SweepManifest {
  std::vector<std::filesystem::path> p1, n1, p2;
  SweepAggregation aggregation = SweepAggregation::kPooled;
};

inline SweepManifest read_sweep_manifest(const std::filesystem::path& path) {
  SweepManifest m;
  try {
    const auto j = nlohmann::json::parse(detail::read_all(path));
    auto list = [&](const char* key) {
      std::vector<std::filesystem::path> out;
      for (const auto& p : j.at(key)) {
        std::filesystem::path q = p.get<std::string>();
        out.push_back(q.is_relative() ? path.parent_path() / q : q);
      }
      return out;
    };
    m.p1 = list("p1");
    m.n1 = list("n1");
    m.p2 = list("p2");
    if (j.contains("aggregation")) m.aggregation = parse_sweep_aggregation(j["aggregation"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace mlrpa
