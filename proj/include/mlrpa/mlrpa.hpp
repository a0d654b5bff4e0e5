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

// Umbrella header.

#pragma once

#include "mlrpa/aggregation.hpp"
#include "mlrpa/checkpoint.hpp"
#include "mlrpa/corpuscan.hpp"
#include "mlrpa/data.hpp"
#include "mlrpa/errors.hpp"
#include "mlrpa/feature_map.hpp"
#include "mlrpa/heads.hpp"
#include "mlrpa/loss.hpp"
#include "mlrpa/metrics.hpp"
#include "mlrpa/numerics.hpp"
#include "mlrpa/promptlab.hpp"
#include "mlrpa/train.hpp"
