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

// SGD with momentum, per-group learning rates, cosine annealing and the
// epoch/batch training loop over any scoring head.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mlrpa/aggregation.hpp"
#include "mlrpa/data.hpp"
#include "mlrpa/errors.hpp"
#include "mlrpa/heads.hpp"
#include "mlrpa/loss.hpp"
#include "mlrpa/metrics.hpp"
#include "mlrpa/numerics.hpp"

namespace mlrpa {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double lr_prompt_anchor = 0.002;
  double lr_free_embedding = 1.0;
  double lr_projector = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const {
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (batch_size < 1) throw DomainError("batch_size must be >= 1");
    if (!(lr_prompt_anchor > 0.0) || !(lr_free_embedding > 0.0) || !(lr_projector > 0.0)) {
      throw DomainError("learning rates must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
    if (workers < 1) throw DomainError("workers must be >= 1");
  }

  double learning_rate(LrGroup g) const {
    switch (g) {
      case LrGroup::kProjector: return lr_projector;
      case LrGroup::kPromptAnchor: return lr_prompt_anchor;
      case LrGroup::kFreeEmbedding: return lr_free_embedding;
    }
    return 0.0;
  }
};

/// lr0 * (1 + cos(pi t / T)) / 2 for 0 <= t <= T.
inline double cosine_lr(double lr0, std::size_t step, std::size_t total_steps) {
  if (total_steps < 1) throw DomainError("cosine_lr: total_steps must be >= 1");
  if (step > total_steps) {
    throw DomainError("cosine_lr: step " + std::to_string(step) + " exceeds total " +
                      std::to_string(total_steps));
  }
  return lr0 * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps)));
}

/// Parameters sharing one learning rate, with their momentum buffers.
struct ParamGroup {
  std::string name;
  LrGroup lr_key = LrGroup::kProjector;
  std::vector<Tensor*> params;
  std::vector<Tensor> velocity;
};

/// v <- momentum * v + g;  theta <- theta - lr * v.
inline void sgd_step(ParamGroup& group, const std::vector<Tensor>& grads, double lr, double momentum) {
  if (grads.size() != group.params.size() || group.velocity.size() != group.params.size()) {
    throw ShapeError("group '" + group.name + "' has " + std::to_string(group.params.size()) +
                     " parameters but received " + std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t p = 0; p < grads.size(); ++p) {
    Tensor& theta = *group.params[p];
    Tensor& v = group.velocity[p];
    if (grads[p].shape() != theta.shape()) {
      throw ShapeError("gradient shape " + shape_to_string(grads[p].shape()) + " does not match parameter " +
                       shape_to_string(theta.shape()) + " in group '" + group.name + "'");
    }
    for (std::size_t k = 0; k < theta.size(); ++k) {
      v[k] = momentum * v[k] + grads[p][k];
      theta[k] -= lr * v[k];
    }
  }
}

/// Groups a head's parameters by learning-rate key. `slots[i]` locates
/// parameter i of head.parameters() as (group index, position in group).
struct GroupedParams {
  std::vector<ParamGroup> groups;
  std::vector<std::pair<std::size_t, std::size_t>> slots;
};

template <ScoringHead Head>
GroupedParams group_parameters(Head& head) {
  GroupedParams out;
  const auto params = head.parameters();
  for (LrGroup key : {LrGroup::kProjector, LrGroup::kPromptAnchor, LrGroup::kFreeEmbedding}) {
    ParamGroup g{std::string(lr_group_name(key)), key, {}, {}};
    for (const auto& p : params) {
      if (p.group != key) continue;
      g.params.push_back(p.tensor);
      g.velocity.emplace_back(p.tensor->shape());
    }
    if (!g.params.empty()) out.groups.push_back(std::move(g));
  }
  for (const auto& p : params) {
    for (std::size_t gi = 0; gi < out.groups.size(); ++gi) {
      const auto& ps = out.groups[gi].params;
      for (std::size_t k = 0; k < ps.size(); ++k) {
        if (ps[k] == p.tensor) out.slots.emplace_back(gi, k);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Forward / backward through the full chain

struct ForwardPass {
  SpatialLogits logits;
  AttentionMaps maps;
  PredictionPair pred;
};

template <ScoringHead Head>
ForwardPass forward_image(const Head& head, const FeatureMap& z) {
  ForwardPass f;
  f.logits = head.forward(z);
  f.maps = attention_maps(f.logits);
  f.pred = aggregate(f.logits, f.maps);
  return f;
}

struct ImageGradient {
  double loss = 0.0;
  std::vector<Tensor> grads;  // aligned with head.parameters()
};

/// Loss of one image and its gradient w.r.t. every trainable parameter.
template <ScoringHead Head>
ImageGradient image_gradient(const Head& head, const FeatureMap& z, std::span<const std::int8_t> labels,
                             const LossConfig& cfg) {
  const auto f = forward_image(head, z);
  const auto l = image_loss(f.pred, labels, cfg);
  const auto g_logits = aggregate_backward(f.logits, f.maps, f.pred, l.grad_positive, l.grad_negative);
  return {l.total, head.backward(z, g_logits)};
}

/// Runs fn(i) for i in [0, count) on `workers` threads, contiguous chunks.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w * chunk; i < std::min(count, (w + 1) * chunk); ++i) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// y^ for every image and class.
template <ScoringHead Head>
std::vector<std::vector<double>> predict_scores(const Head& head, const std::vector<FeatureMap>& features,
                                                std::size_t workers = 1) {
  std::vector<std::vector<double>> out(features.size());
  parallel_for(features.size(), workers,
               [&](std::size_t i) { out[i] = pair_probability(forward_image(head, features[i]).pred); });
  return out;
}

template <ScoringHead Head>
MapReport evaluate_map(const Head& head, const DatasetBundle& data, std::size_t workers = 1) {
  return mean_average_precision(rank_by_class(predict_scores(head, data.features, workers), data.labels));
}

/// Summed loss over a dataset with no parameter update.
template <ScoringHead Head>
double dataset_loss(const Head& head, const DatasetBundle& data, const LossConfig& cfg) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.num_images(); ++i) {
    total += image_loss(forward_image(head, data.features[i]).pred, data.labels.row(i), cfg).total;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Training loop

struct EpochLog {
  std::size_t epoch = 0;
  std::vector<std::pair<std::string, double>> learning_rates;  // per group
  double train_loss = 0.0;  // mean per image over the epoch's batches
  std::optional<double> val_map;
};

template <ScoringHead Head>
struct TrainResult {
  Head head;
  std::vector<EpochLog> log;
};

namespace detail {

template <ScoringHead Head>
void check_head_matches(const Head& head, const DatasetBundle& data) {
  data.validate();
  if (data.features.empty()) throw ShapeError("dataset is empty");
  if (data.features.front().channels() != head.channels()) {
    throw ShapeError("feature channels " + std::to_string(data.features.front().channels()) +
                     " do not match head input width " + std::to_string(head.channels()));
  }
  if (data.num_classes() != head.num_classes()) {
    throw ShapeError("labels have " + std::to_string(data.num_classes()) + " classes, head has " +
                     std::to_string(head.num_classes()));
  }
}

inline bool all_finite(const std::vector<Tensor>& ts) {
  for (const auto& t : ts) {
    for (double v : t.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Mini-batch SGD over `train`. The learning rate of every group follows a
/// per-epoch cosine schedule; images are reshuffled each epoch with a seeded
/// Fisher-Yates pass. Per-image gradients may be computed on several workers
/// but are summed in image order, so results do not depend on `workers`.
template <ScoringHead Head>
TrainResult<Head> train_run(const DatasetBundle& train, Head head, const TrainConfig& cfg,
                            const LossConfig& loss_cfg, const DatasetBundle* validation = nullptr) {
  cfg.validate();
  loss_cfg.validate();
  detail::check_head_matches(head, train);
  if (validation) detail::check_head_matches(head, *validation);

  TrainResult<Head> result{std::move(head), {}};
  Head& h = result.head;
  GroupedParams grouped = group_parameters(h);
  const std::size_t m = train.num_images();
  Rng shuffle_rng(cfg.seed, 0x5348);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    std::vector<double> lrs;
    for (const auto& g : grouped.groups) {
      lrs.push_back(cosine_lr(cfg.learning_rate(g.lr_key), epoch, cfg.epochs));
      entry.learning_rates.emplace_back(g.name, lrs.back());
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0, batch = 0; start < m; start += cfg.batch_size, ++batch) {
      const std::size_t len = std::min(cfg.batch_size, m - start);
      std::vector<ImageGradient> slots(len);
      parallel_for(len, cfg.workers, [&](std::size_t k) {
        const std::size_t i = order[start + k];
        slots[k] = image_gradient(h, train.features[i], train.labels.row(i), loss_cfg);
      });

      double batch_total = 0.0;
      std::vector<std::vector<Tensor>> grads(grouped.groups.size());
      for (std::size_t gi = 0; gi < grouped.groups.size(); ++gi) {
        for (const Tensor* p : grouped.groups[gi].params) grads[gi].emplace_back(p->shape());
      }
      for (std::size_t k = 0; k < len; ++k) {
        if (!std::isfinite(slots[k].loss) || !detail::all_finite(slots[k].grads)) {
          throw NumericalError("non-finite loss or gradient in epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch) + " (image " + std::to_string(order[start + k]) + ")");
        }
        batch_total += slots[k].loss;
        for (std::size_t p = 0; p < slots[k].grads.size(); ++p) {
          const auto [gi, pos] = grouped.slots[p];
          Tensor& acc = grads[gi][pos];
          for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += slots[k].grads[p][e];
        }
      }
      for (std::size_t gi = 0; gi < grouped.groups.size(); ++gi) {
        sgd_step(grouped.groups[gi], grads[gi], lrs[gi], cfg.momentum);
        for (const Tensor* p : grouped.groups[gi].params) {
          if (!detail::all_finite({*p})) {
            throw NumericalError("parameters became non-finite in epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch));
          }
        }
      }
      epoch_loss += batch_total;
    }
    entry.train_loss = epoch_loss / static_cast<double>(m);
    if (validation) entry.val_map = evaluate_map(h, *validation, cfg.workers).mean;
    result.log.push_back(std::move(entry));
  }
  return result;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// epoch, lr_<group>..., train_loss, val_map
inline void write_metrics_csv(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "epoch";
  if (!log.empty()) {
    for (const auto& [name, lr] : log.front().learning_rates) os << ",lr_" << name;
  }
  os << ",train_loss,val_map\n";
  for (const auto& e : log) {
    os << e.epoch;
    for (const auto& [name, lr] : e.learning_rates) os << "," << format_double(lr);
    os << "," << format_double(e.train_loss) << ",";
    if (e.val_map) os << format_double(*e.val_map);
    os << "\n";
  }
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace mlrpa
