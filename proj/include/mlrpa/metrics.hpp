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

// Average precision and mean average precision.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mlrpa/data.hpp"
#include "mlrpa/errors.hpp"

namespace mlrpa {

struct ScoredLabel {
  double score;
  int label;  // +1 or -1
};

/// Scores and fully annotated labels of one class over the evaluation set.
using RankedScores = std::vector<ScoredLabel>;

/// Mean of precision@k over the ranks k of the positives, after a stable
/// descending sort by score (ties keep their original order).
inline double average_precision(const RankedScores& items) {
  std::size_t positives = 0;
  for (const auto& it : items) {
    if (it.label == 1) ++positives;
    else if (it.label != -1) throw DomainError("evaluation labels must be +1 or -1, got " + std::to_string(it.label));
  }
  if (positives == 0) throw DomainError("average precision is undefined without positive labels");
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].score > items[b].score; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (items[order[k]].label == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

struct MapReport {
  std::vector<std::optional<double>> per_class;  // nullopt: no positives, excluded
  double mean = 0.0;
  std::size_t valid_classes = 0;
};

/// Unweighted mean of AP over classes that have at least one positive.
inline MapReport mean_average_precision(const std::vector<RankedScores>& classes) {
  MapReport r;
  double sum = 0.0;
  for (const auto& c : classes) {
    const bool has_positive =
        std::any_of(c.begin(), c.end(), [](const ScoredLabel& s) { return s.label == 1; });
    if (!has_positive) {
      r.per_class.push_back(std::nullopt);
      continue;
    }
    const double ap = average_precision(c);
    r.per_class.push_back(ap);
    sum += ap;
    ++r.valid_classes;
  }
  if (r.valid_classes == 0) throw DomainError("mAP is undefined: no class has a positive label");
  r.mean = sum / static_cast<double>(r.valid_classes);
  return r;
}

/// Builds per-class rankings from an M x N score table and full labels.
inline std::vector<RankedScores> rank_by_class(const std::vector<std::vector<double>>& scores,
                                               const LabelMatrix& labels) {
  if (scores.size() != labels.num_images()) {
    throw ShapeError(std::to_string(scores.size()) + " score rows for " +
                     std::to_string(labels.num_images()) + " label rows");
  }
  if (!labels.fully_annotated()) {
    throw DomainError("evaluation labels contain unknown entries; evaluation needs full annotation");
  }
  std::vector<RankedScores> out(labels.num_classes());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != labels.num_classes()) throw ShapeError("score row length does not match class count");
    for (std::size_t j = 0; j < labels.num_classes(); ++j) {
      out[j].push_back({scores[i][j], labels.at(i, j)});
    }
  }
  return out;
}

/// Per-class AP rows followed by a final mAP row. Classes without positives
/// are written with an empty AP field.
inline void write_eval_csv(const std::filesystem::path& path, const MapReport& report,
                           const std::vector<std::string>& class_names) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  char buf[64];
  os << "class,ap\n";
  for (std::size_t j = 0; j < report.per_class.size(); ++j) {
    os << (j < class_names.size() ? class_names[j] : "class" + std::to_string(j)) << ",";
    if (report.per_class[j]) {
      std::snprintf(buf, sizeof buf, "%.17g", *report.per_class[j]);
      os << buf;
    }
    os << "\n";
  }
  std::snprintf(buf, sizeof buf, "%.17g", report.mean);
  os << "mAP," << buf << "\n";
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace mlrpa
