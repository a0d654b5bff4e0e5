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

// Head checkpoints: a directory holding "head.json" plus one ".mlt" per tensor.

#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "mlrpa/data.hpp"
#include "mlrpa/heads.hpp"

namespace mlrpa {

/// Name of the configuration a bank's side modes correspond to.
inline std::string head_label(const AnyHead& head) {
  if (std::holds_alternative<ProjectorHead>(head)) return "baseline";
  const auto& b = std::get<EmbeddingHead>(head).bank;
  const bool pf = b.positive_mode == SideMode::kFreeLearnable;
  const bool nf = b.negative_mode == SideMode::kFreeLearnable;
  if (!pf && nf) return "positivecoop";
  if (pf && !nf) return "negativecoop";
  if (pf && nf) return "freedual";
  return "anchored";
}

inline void save_checkpoint(const AnyHead& head, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json desc;
  desc["format"] = "mlrpa-head-1";
  desc["head"] = head_label(head);
  if (const auto* p = std::get_if<ProjectorHead>(&head)) {
    desc["kind"] = "projector";
    desc["num_classes"] = p->num_classes();
    desc["dim"] = p->channels();
    desc["use_bias"] = p->use_bias;
    desc["tensors"] = {{"weight", "weight.mlt"}, {"bias", "bias.mlt"}};
    write_tensor_file(p->weight, dir / "weight.mlt");
    write_tensor_file(p->bias, dir / "bias.mlt");
  } else {
    const auto& e = std::get<EmbeddingHead>(head);
    desc["kind"] = "embedding";
    desc["num_classes"] = e.num_classes();
    desc["dim"] = e.channels();
    desc["temperature"] = e.temperature;
    desc["positive_mode"] = side_mode_name(e.bank.positive_mode);
    desc["negative_mode"] = side_mode_name(e.bank.negative_mode);
    nlohmann::json tensors = {{"positive", "positive.mlt"}, {"negative", "negative.mlt"}};
    write_tensor_file(e.bank.positive, dir / "positive.mlt");
    write_tensor_file(e.bank.negative, dir / "negative.mlt");
    if (!e.bank.anchors_positive.empty()) {
      tensors["anchors_positive"] = "anchors_positive.mlt";
      write_tensor_file(e.bank.anchors_positive, dir / "anchors_positive.mlt");
    }
    if (!e.bank.anchors_negative.empty()) {
      tensors["anchors_negative"] = "anchors_negative.mlt";
      write_tensor_file(e.bank.anchors_negative, dir / "anchors_negative.mlt");
    }
    desc["tensors"] = tensors;
  }
  write_bytes(dir / "head.json", desc.dump(2) + "\n");
}

inline AnyHead load_checkpoint(const std::filesystem::path& dir) {
  const auto desc_path = dir / "head.json";
  nlohmann::json desc;
  try {
    desc = nlohmann::json::parse(detail::read_all(desc_path));
    const auto kind = desc.at("kind").get<std::string>();
    const auto& tensors = desc.at("tensors");
    auto load = [&](const char* key) { return read_tensor_file(dir / tensors.at(key).get<std::string>()); };
    if (kind == "projector") {
      ProjectorHead p{load("weight"), load("bias"), desc.at("use_bias").get<bool>()};
      p.validate();
      return p;
    }
    if (kind == "embedding") {
      EmbeddingHead e;
      e.temperature = desc.at("temperature").get<double>();
      e.bank.positive = load("positive");
      e.bank.negative = load("negative");
      e.bank.positive_mode = parse_side_mode(desc.at("positive_mode").get<std::string>());
      e.bank.negative_mode = parse_side_mode(desc.at("negative_mode").get<std::string>());
      if (tensors.contains("anchors_positive")) e.bank.anchors_positive = load("anchors_positive");
      if (tensors.contains("anchors_negative")) e.bank.anchors_negative = load("anchors_negative");
      e.bank.validate();
      return e;
    }
    throw FormatError(desc_path.string() + ": unknown head kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(desc_path.string() + ": " + e.what());
  }
}

}  // namespace mlrpa
