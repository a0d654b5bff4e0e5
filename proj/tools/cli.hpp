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

// Subcommands of the `mlrpa` executable. Each returns a process exit code:
// 0 success, 1 usage error, 2 data or shape error, 3 numerical abort.

#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "mlrpa/mlrpa.hpp"

namespace mlrpa::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

inline void write_json(const fs::path& path, const json& j) { write_bytes(path, j.dump(2) + "\n"); }

inline fs::path config_path_for(const fs::path& output_file) {
  auto p = output_file;
  p += ".config.json";
  return p;
}

inline fs::path resolve(const fs::path& base_dir, const std::string& p) {
  fs::path q(p);
  return q.is_relative() ? fs::absolute(base_dir / q).lexically_normal() : q;
}

// ---------------------------------------------------------------------------
// Run manifest

/// Everything a training run needs, with file paths already resolved.
struct RunManifest {
  fs::path features;
  fs::path labels;
  std::optional<fs::path> val_features;
  std::optional<fs::path> val_labels;
  std::optional<fs::path> anchors_positive;
  std::optional<fs::path> anchors_negative;
  std::string head = "baseline";
  std::optional<SideMode> positive_mode;
  std::optional<SideMode> negative_mode;
  double temperature = 0.02;
  bool projector_bias = true;
  TrainConfig train;
  LossConfig loss;
  std::optional<MaskSpec> mask;
  fs::path output_dir = "run";
};

inline RunManifest parse_manifest(const json& j, const fs::path& base_dir) {
  RunManifest m;
  try {
    m.features = resolve(base_dir, j.at("features").get<std::string>());
    m.labels = resolve(base_dir, j.at("labels").get<std::string>());
    auto opt_path = [&](const char* key) -> std::optional<fs::path> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return resolve(base_dir, j[key].get<std::string>());
    };
    m.val_features = opt_path("val_features");
    m.val_labels = opt_path("val_labels");
    m.anchors_positive = opt_path("anchors_positive");
    m.anchors_negative = opt_path("anchors_negative");
    m.head = j.value("head", m.head);
    if (m.head != "baseline" && m.head != "positivecoop" && m.head != "negativecoop" && m.head != "freedual") {
      throw UsageError("unknown head '" + m.head + "' (expected baseline, positivecoop, negativecoop, freedual)");
    }
    if (j.contains("positive_mode") && !j["positive_mode"].is_null()) {
      m.positive_mode = parse_side_mode(j["positive_mode"].get<std::string>());
    }
    if (j.contains("negative_mode") && !j["negative_mode"].is_null()) {
      m.negative_mode = parse_side_mode(j["negative_mode"].get<std::string>());
    }
    m.temperature = j.value("temperature", m.temperature);
    m.projector_bias = j.value("projector_bias", m.projector_bias);
    if (j.contains("train")) {
      const auto& t = j["train"];
      m.train.epochs = t.value("epochs", m.train.epochs);
      m.train.batch_size = t.value("batch_size", m.train.batch_size);
      m.train.lr_prompt_anchor = t.value("lr_prompt_anchor", m.train.lr_prompt_anchor);
      m.train.lr_free_embedding = t.value("lr_free_embedding", m.train.lr_free_embedding);
      m.train.lr_projector = t.value("lr_projector", m.train.lr_projector);
      m.train.momentum = t.value("momentum", m.train.momentum);
      m.train.seed = t.value("seed", m.train.seed);
      m.train.workers = t.value("workers", m.train.workers);
    }
    if (j.contains("loss")) {
      const auto& l = j["loss"];
      m.loss.gamma_plus = l.value("gamma_plus", m.loss.gamma_plus);
      m.loss.gamma_minus = l.value("gamma_minus", m.loss.gamma_minus);
      m.loss.delta = l.value("delta", m.loss.delta);
      m.loss.focal_detach = l.value("focal_detach", m.loss.focal_detach);
    }
    if (j.contains("mask") && !j["mask"].is_null()) {
      MaskSpec s;
      s.known_fraction = j["mask"].value("known_fraction", 1.0);
      s.seed = j["mask"].value("seed", std::uint64_t{0});
      m.mask = s;
    }
    if (j.contains("output_dir")) m.output_dir = resolve(base_dir, j["output_dir"].get<std::string>());
    else m.output_dir = resolve(base_dir, "run");
  } catch (const json::exception& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
  m.train.validate();
  m.loss.validate();
  if (!(m.temperature > 0.0)) throw UsageError("manifest: temperature must be positive");
  return m;
}

/// The manifest with every default filled in; feeding it back reproduces the run.
inline json resolved_manifest(const RunManifest& m) {
  json j;
  j["features"] = m.features.string();
  j["labels"] = m.labels.string();
  auto opt = [&](const char* key, const std::optional<fs::path>& p) {
    j[key] = p ? json(p->string()) : json(nullptr);
  };
  opt("val_features", m.val_features);
  opt("val_labels", m.val_labels);
  opt("anchors_positive", m.anchors_positive);
  opt("anchors_negative", m.anchors_negative);
  j["head"] = m.head;
  j["positive_mode"] = m.positive_mode ? json(side_mode_name(*m.positive_mode)) : json(nullptr);
  j["negative_mode"] = m.negative_mode ? json(side_mode_name(*m.negative_mode)) : json(nullptr);
  j["temperature"] = m.temperature;
  j["projector_bias"] = m.projector_bias;
  j["train"] = {{"epochs", m.train.epochs},
                {"batch_size", m.train.batch_size},
                {"lr_prompt_anchor", m.train.lr_prompt_anchor},
                {"lr_free_embedding", m.train.lr_free_embedding},
                {"lr_projector", m.train.lr_projector},
                {"momentum", m.train.momentum},
                {"seed", m.train.seed},
                {"workers", m.train.workers}};
  j["loss"] = {{"gamma_plus", m.loss.gamma_plus},
               {"gamma_minus", m.loss.gamma_minus},
               {"delta", m.loss.delta},
               {"focal_detach", m.loss.focal_detach}};
  j["mask"] = m.mask ? json{{"known_fraction", m.mask->known_fraction}, {"seed", m.mask->seed}} : json(nullptr);
  j["output_dir"] = m.output_dir.string();
  return j;
}

inline DatasetBundle load_bundle(const fs::path& features, const fs::path& labels) {
  DatasetBundle b;
  b.features = read_features(features);
  auto lf = read_label_csv(labels);
  b.labels = std::move(lf.labels);
  b.class_names = std::move(lf.class_names);
  b.validate();
  return b;
}

/// Builds the untrained head named by the manifest for `data`.
inline AnyHead build_head(const RunManifest& m, const DatasetBundle& data) {
  const std::size_t n = data.num_classes();
  const std::size_t d = data.features.front().channels();
  if (m.head == "baseline") return make_projector(n, d, m.train.seed, m.projector_bias);

  auto load_anchor = [&](const std::optional<fs::path>& p, const char* side) {
    if (!p) throw UsageError(std::string("head '") + m.head + "' needs anchors_" + side + " in the manifest");
    auto bank = read_bank_file(*p);
    if (bank.vectors.shape() != Shape{n, d}) {
      throw ShapeError(p->string() + ": anchor bank shape " + shape_to_string(bank.vectors.shape()) +
                       " does not match " + std::to_string(n) + " classes x " + std::to_string(d) + " channels");
    }
    return bank.vectors;
  };
  SideMode pos = SideMode::kFreeLearnable;
  SideMode neg = SideMode::kFreeLearnable;
  if (m.head == "positivecoop") pos = SideMode::kAnchorLearnable;
  if (m.head == "negativecoop") neg = SideMode::kAnchorLearnable;
  if (m.positive_mode) pos = *m.positive_mode;
  if (m.negative_mode) neg = *m.negative_mode;
  const Tensor ap = pos == SideMode::kFreeLearnable ? Tensor() : load_anchor(m.anchors_positive, "positive");
  const Tensor an = neg == SideMode::kFreeLearnable ? Tensor() : load_anchor(m.anchors_negative, "negative");
  return EmbeddingHead{make_bank(n, d, pos, neg, ap, an, m.train.seed), m.temperature};
}

struct RunOutputs {
  AnyHead head;
  std::vector<EpochLog> log;
};

/// Loads, validates, trains and writes checkpoint/, metrics.csv and
/// resolved_config.json under the manifest's output directory.
inline RunOutputs run_training(const RunManifest& m) {
  DatasetBundle train = load_bundle(m.features, m.labels);
  if (m.mask) train.labels = mask_labels(train.labels, *m.mask);
  std::optional<DatasetBundle> val;
  if (m.val_features || m.val_labels) {
    if (!m.val_features || !m.val_labels) throw UsageError("val_features and val_labels must be given together");
    val = load_bundle(*m.val_features, *m.val_labels);
  }
  AnyHead head = build_head(m, train);
  RunOutputs out;
  std::visit(
      [&](auto& h) {
        auto r = train_run(train, h, m.train, m.loss, val ? &*val : nullptr);
        out.head = std::move(r.head);
        out.log = std::move(r.log);
      },
      head);
  fs::create_directories(m.output_dir);
  save_checkpoint(out.head, m.output_dir / "checkpoint");
  write_metrics_csv(m.output_dir / "metrics.csv", out.log);
  write_json(m.output_dir / "resolved_config.json", resolved_manifest(m));
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthArgs {
  SynthSpec spec;
  std::size_t test_images = 0;
  std::string out_dir;
};

inline void cmd_synth(const SynthArgs& a) {
  SynthSpec s = a.spec;
  s.num_images = a.spec.num_images + a.test_images;
  const DatasetBundle all = generate_synthetic(s);
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  DatasetBundle train = all;
  if (a.test_images > 0) {
    auto [tr, te] = split_bundle(all, a.spec.num_images);
    train = std::move(tr);
    write_tensor_file(stack_features(te.features), dir / "test_features.mlt");
    write_label_csv(dir / "test_labels.csv", te.labels, te.class_names);
  }
  write_tensor_file(stack_features(train.features), dir / "features.mlt");
  write_label_csv(dir / "labels.csv", train.labels, train.class_names);
  write_bank_file(dir / "anchors_pos.mlt", all.anchors_positive, all.class_names);
  write_bank_file(dir / "anchors_neg.mlt", all.anchors_negative, all.class_names);

  json manifest = {{"features", "features.mlt"},
                   {"labels", "labels.csv"},
                   {"anchors_positive", "anchors_pos.mlt"},
                   {"anchors_negative", "anchors_neg.mlt"},
                   {"head", "baseline"},
                   {"output_dir", "run"}};
  if (a.test_images > 0) {
    manifest["val_features"] = "test_features.mlt";
    manifest["val_labels"] = "test_labels.csv";
  }
  write_json(dir / "manifest.json", manifest);
  write_json(dir / "resolved_config.json",
             {{"command", "synth"},
              {"images", a.spec.num_images},
              {"test_images", a.test_images},
              {"classes", s.num_classes},
              {"height", s.height},
              {"width", s.width},
              {"dim", s.dim},
              {"seed", s.seed},
              {"noise", s.noise},
              {"presence", s.presence},
              {"background_scale", s.background_scale},
              {"background_offset", s.background_offset},
              {"anchor_noise", s.anchor_noise},
              {"negative_anchor_mix", s.negative_anchor_mix},
              {"out_dir", fs::absolute(dir).string()}});
}

struct MaskArgs {
  std::string labels;
  double p = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

inline void cmd_mask(const MaskArgs& a) {
  auto lf = read_label_csv(a.labels);
  const auto masked = mask_labels(lf.labels, {a.p, a.seed});
  write_label_csv(a.out, masked, lf.class_names);
  write_json(config_path_for(a.out), {{"command", "mask"},
                                      {"labels", fs::absolute(a.labels).string()},
                                      {"known_fraction", a.p},
                                      {"seed", a.seed},
                                      {"out", fs::absolute(a.out).string()}});
}

struct TrainArgs {
  std::string manifest;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> epochs;
  std::optional<std::string> out_dir;
};

inline RunOutputs cmd_train(const TrainArgs& a) {
  json j;
  try {
    j = json::parse(detail::read_all(a.manifest));
  } catch (const json::exception& e) {
    throw UsageError(a.manifest + ": " + e.what());
  }
  RunManifest m = parse_manifest(j, fs::path(a.manifest).parent_path());
  if (a.workers) m.train.workers = *a.workers;
  if (a.epochs) m.train.epochs = *a.epochs;
  if (a.out_dir) m.output_dir = fs::absolute(*a.out_dir);
  m.train.validate();
  return run_training(m);
}

struct EvalArgs {
  std::string checkpoint;
  std::string features;
  std::string labels;
  std::string out;
  std::string predictions;
  std::size_t workers = 1;
};

inline MapReport cmd_eval(const EvalArgs& a) {
  const AnyHead head = load_checkpoint(a.checkpoint);
  const DatasetBundle data = load_bundle(a.features, a.labels);
  std::vector<std::vector<double>> scores;
  std::visit(
      [&](const auto& h) {
        if (data.features.front().channels() != h.channels() || data.num_classes() != h.num_classes()) {
          throw ShapeError("checkpoint expects " + std::to_string(h.num_classes()) + " classes x " +
                           std::to_string(h.channels()) + " channels");
        }
        scores = predict_scores(h, data.features, a.workers);
      },
      head);
  const MapReport report = mean_average_precision(rank_by_class(scores, data.labels));
  for (std::size_t j = 0; j < report.per_class.size(); ++j) {
    if (!report.per_class[j]) {
      std::cerr << "warning: class '" << data.class_names[j] << "' has no positives; excluded from mAP\n";
    }
  }
  write_eval_csv(a.out, report, data.class_names);
  if (!a.predictions.empty()) {
    std::string csv;
    for (std::size_t j = 0; j < data.class_names.size(); ++j) csv += (j ? "," : "") + data.class_names[j];
    csv += "\n";
    for (const auto& row : scores) {
      for (std::size_t j = 0; j < row.size(); ++j) csv += (j ? "," : "") + format_double(row[j]);
      csv += "\n";
    }
    write_bytes(a.predictions, csv);
  }
  write_json(config_path_for(a.out), {{"command", "eval"},
                                      {"checkpoint", fs::absolute(a.checkpoint).string()},
                                      {"features", fs::absolute(a.features).string()},
                                      {"labels", fs::absolute(a.labels).string()},
                                      {"out", fs::absolute(a.out).string()},
                                      {"predictions", a.predictions.empty() ? json(nullptr) : json(fs::absolute(a.predictions).string())},
                                      {"workers", a.workers}});
  return report;
}

struct ExportMapsArgs {
  std::string checkpoint;
  std::string features;
  std::size_t image = 0;
  std::size_t class_index = 0;
  std::string polarity = "positive";
  std::string out;
};

inline void cmd_export_maps(const ExportMapsArgs& a) {
  const AnyHead head = load_checkpoint(a.checkpoint);
  const auto features = read_features(a.features);
  if (a.image >= features.size()) {
    throw DomainError("image index " + std::to_string(a.image) + " out of range [0, " +
                      std::to_string(features.size()) + ")");
  }
  Polarity pol;
  if (a.polarity == "positive") pol = Polarity::kPositive;
  else if (a.polarity == "negative") pol = Polarity::kNegative;
  else throw UsageError("polarity must be 'positive' or 'negative'");
  const SpatialLogits logits = std::visit([&](const auto& h) { return h.forward(features[a.image]); }, head);
  export_similarity_map(logits, a.class_index, pol, a.out);
  write_json(config_path_for(a.out), {{"command", "export-maps"},
                                      {"checkpoint", fs::absolute(a.checkpoint).string()},
                                      {"features", fs::absolute(a.features).string()},
                                      {"image", a.image},
                                      {"class", a.class_index},
                                      {"polarity", a.polarity},
                                      {"out", fs::absolute(a.out).string()}});
}

struct ScanArgs {
  std::vector<std::string> inputs;
  std::string lexicon;
  std::string nouns;
  std::size_t workers = 1;
  std::string format = "txt";
  bool header = false;
  std::string out;
};

/// Returns the scan result; the caller maps failed shards to a nonzero exit.
inline ScanResult cmd_scan(const ScanArgs& a, std::ostream& out, std::ostream& log) {
  std::vector<std::string> paths;
  for (const auto& pattern : a.inputs) {
    auto expanded = expand_glob(pattern);
    if (expanded.empty()) log << "warning: pattern '" << pattern << "' matched no files\n";
    paths.insert(paths.end(), expanded.begin(), expanded.end());
  }
  const NegationLexicon lexicon = a.lexicon.empty() ? NegationLexicon() : NegationLexicon(WordSet::from_file(a.lexicon));
  const NounList nouns = a.nouns.empty() ? NounList() : NounList(WordSet::from_file(a.nouns));
  ShardFormat format = parse_shard_format(a.format);
  format.header = a.header;
  const auto result = scan_corpus(paths, lexicon, nouns, a.workers, format,
                                  [&](std::size_t i, const std::string& p, const CorpusStats& s) {
                                    log << "[" << (i + 1) << "/" << paths.size() << "] " << p << ": "
                                        << s.total_texts << " texts\n";
                                  });
  for (const auto& e : result.errors) log << "error: " << e.path << ": " << e.message << "\n";
  json j = to_json(result);
  j["config"] = {{"command", "scan"},  {"inputs", a.inputs},   {"lexicon", a.lexicon.empty() ? json(nullptr) : json(a.lexicon)},
                 {"nouns", a.nouns.empty() ? json(nullptr) : json(a.nouns)}, {"workers", a.workers},
                 {"format", a.format}, {"header", a.header}};
  log << summary_text(result.stats);
  if (!a.out.empty()) write_json(a.out, j);
  out << j.dump(2) << "\n";
  return result;
}

struct PromptStatsArgs {
  std::string a;
  std::string b;
  std::string sweep;
  std::string aggregation;
  std::string out;
};

inline json cmd_promptstats(const PromptStatsArgs& args, std::ostream& out, std::ostream& log) {
  json j;
  char line[160];
  auto row = [&](const char* name, const SimilarityStats& s) {
    std::snprintf(line, sizeof line, "%-8s mean %.4f  std %.4f  min %.4f  max %.4f  (n=%zu)\n", name, s.mean,
                  s.std, s.min, s.max, s.count);
    log << line;
  };
  if (!args.sweep.empty()) {
    SweepManifest m = read_sweep_manifest(args.sweep);
    if (!args.aggregation.empty()) m.aggregation = parse_sweep_aggregation(args.aggregation);
    auto load = [](const std::vector<fs::path>& ps) {
      std::vector<Tensor> out;
      for (const auto& p : ps) out.push_back(read_bank_file(p).vectors);
      return out;
    };
    const auto s = template_sweep_stats(load(m.p1), load(m.n1), load(m.p2), m.aggregation);
    row("P1-N1", s.p1_n1);
    row("P1-P2", s.p1_p2);
    j["p1_n1"] = to_json(s.p1_n1);
    j["p1_p2"] = to_json(s.p1_p2);
    j["templates"] = m.p1.size();
    j["config"] = {{"command", "promptstats"},
                   {"sweep", fs::absolute(args.sweep).string()},
                   {"aggregation", m.aggregation == SweepAggregation::kPooled ? "pooled" : "class-mean"}};
  } else {
    if (args.a.empty() || args.b.empty()) throw UsageError("promptstats needs --a and --b, or --sweep");
    const auto a = read_bank_file(args.a);
    const auto b = read_bank_file(args.b);
    if (!a.class_names.empty() && !b.class_names.empty() && a.class_names != b.class_names) {
      throw ShapeError("banks list different class names or orders");
    }
    const auto s = pairwise_stats(a.vectors, b.vectors);
    row("A-B", s);
    j["pairwise"] = to_json(s);
    j["config"] = {{"command", "promptstats"},
                   {"a", fs::absolute(args.a).string()},
                   {"b", fs::absolute(args.b).string()}};
  }
  if (!args.out.empty()) write_json(args.out, j);
  out << j.dump(2) << "\n";
  return j;
}

// ---------------------------------------------------------------------------
// Entry point

inline int map_exception(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  return kData;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-label recognition with partial annotations: training, evaluation and diagnostics"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic feature-map dataset");
  c_synth->add_option("--images", synth.spec.num_images, "Training images")->default_val(64);
  c_synth->add_option("--test-images", synth.test_images, "Additional held-out images")->default_val(0);
  c_synth->add_option("--classes", synth.spec.num_classes)->default_val(4);
  c_synth->add_option("--height", synth.spec.height)->default_val(3);
  c_synth->add_option("--width", synth.spec.width)->default_val(3);
  c_synth->add_option("--dim", synth.spec.dim)->default_val(16);
  c_synth->add_option("--seed", synth.spec.seed)->default_val(0);
  c_synth->add_option("--noise", synth.spec.noise)->default_val(0.1);
  c_synth->add_option("--presence", synth.spec.presence)->default_val(0.3);
  c_synth->add_option("--out-dir", synth.out_dir)->required();

  MaskArgs mask;
  auto* c_mask = app.add_subcommand("mask", "Hide a random portion of a full label matrix");
  c_mask->add_option("--labels", mask.labels)->required();
  c_mask->add_option("--p", mask.p, "Probability of keeping each label")->required();
  c_mask->add_option("--seed", mask.seed)->default_val(0);
  c_mask->add_option("--out", mask.out)->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a head from a run manifest");
  c_train->add_option("--manifest", train.manifest)->required();
  c_train->add_option("--workers", train.workers);
  c_train->add_option("--epochs", train.epochs);
  c_train->add_option("--out-dir", train.out_dir);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Compute per-class AP and mAP of a checkpoint");
  c_eval->add_option("--checkpoint", eval.checkpoint)->required();
  c_eval->add_option("--features", eval.features)->required();
  c_eval->add_option("--labels", eval.labels)->required();
  c_eval->add_option("--out", eval.out)->required();
  c_eval->add_option("--predictions", eval.predictions, "Optional CSV of per-image probabilities");
  c_eval->add_option("--workers", eval.workers)->default_val(1);

  ExportMapsArgs maps;
  auto* c_maps = app.add_subcommand("export-maps", "Export one class's logit map as .mlt and .pgm");
  c_maps->add_option("--checkpoint", maps.checkpoint)->required();
  c_maps->add_option("--features", maps.features)->required();
  c_maps->add_option("--image", maps.image)->default_val(0);
  c_maps->add_option("--class", maps.class_index)->required();
  c_maps->add_option("--polarity", maps.polarity)->default_val("positive");
  c_maps->add_option("--out", maps.out, "Output prefix")->required();

  ScanArgs scan;
  auto* c_scan = app.add_subcommand("scan", "Count captions with negation words");
  c_scan->add_option("--input", scan.inputs, "Shard path or glob (repeatable)")->required();
  c_scan->add_option("--lexicon", scan.lexicon, "Negation word list file");
  c_scan->add_option("--nouns", scan.nouns, "Noun list file");
  c_scan->add_option("--workers", scan.workers)->default_val(1);
  c_scan->add_option("--format", scan.format, "txt | csv[:col=N] | tsv[:col=N]")->default_val("txt");
  c_scan->add_flag("--header", scan.header, "Skip the first row of each shard");
  c_scan->add_option("--out", scan.out, "Also write the JSON record here");

  PromptStatsArgs ps;
  auto* c_ps = app.add_subcommand("promptstats", "Cosine statistics between embedding banks");
  c_ps->add_option("--a", ps.a);
  c_ps->add_option("--b", ps.b);
  c_ps->add_option("--sweep", ps.sweep, "Template sweep manifest");
  c_ps->add_option("--aggregation", ps.aggregation, "pooled | class-mean");
  c_ps->add_option("--out", ps.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (*c_synth) cmd_synth(synth);
    else if (*c_mask) cmd_mask(mask);
    else if (*c_train) {
      const auto r = cmd_train(train);
      if (!r.log.empty()) {
        err << "final train loss " << format_double(r.log.back().train_loss);
        if (r.log.back().val_map) err << ", val mAP " << format_double(*r.log.back().val_map);
        err << "\n";
      }
    } else if (*c_eval) {
      const auto r = cmd_eval(eval);
      out << "mAP " << format_double(r.mean) << "\n";
    } else if (*c_maps) cmd_export_maps(maps);
    else if (*c_scan) {
      if (!cmd_scan(scan, out, err).errors.empty()) return kData;
    } else if (*c_ps) cmd_promptstats(ps, out, err);
  } catch (const std::exception& e) {
    return map_exception(e, err);
  }
  return kOk;
}

}  // namespace mlrpa::cli
