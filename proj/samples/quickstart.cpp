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

// Trains a linear projector and a PositiveCoOp head on a small synthetic
// dataset with 30% of the training labels visible, then reports test mAP.

#include <cstdio>

#include "mlrpa/mlrpa.hpp"

int main() {
  mlrpa::SynthSpec spec;
  spec.num_images = 160;
  spec.num_classes = 5;
  spec.dim = 24;
  spec.seed = 3;
  const auto all = mlrpa::generate_synthetic(spec);
  auto [train, test] = mlrpa::split_bundle(all, 120);
  train.labels = mlrpa::mask_labels(train.labels, {0.3, 1});

  mlrpa::TrainConfig cfg;
  cfg.epochs = 60;
  const mlrpa::LossConfig loss;

  const auto baseline = mlrpa::train_run(train, mlrpa::make_projector(5, 24, 0), cfg, loss, &test);
  std::printf("baseline      test mAP %.4f\n", *baseline.log.back().val_map);

  const mlrpa::EmbeddingHead coop{mlrpa::make_positivecoop(all.anchors_positive, 24, 0)};
  const auto positive = mlrpa::train_run(train, coop, cfg, loss, &test);
  std::printf("positivecoop  test mAP %.4f\n", *positive.log.back().val_map);
  return 0;
}
