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

// Streaming caption scanner counting texts that contain a negation word and
// texts in which a noun occurs somewhere after a negation word.

#pragma once

#include <glob.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlrpa/errors.hpp"
#include "mlrpa/nouns_default.hpp"

namespace mlrpa {

// ---------------------------------------------------------------------------
// Tokenizer

struct TokenizeDiagnostics {
  std::uint64_t invalid_utf8_bytes = 0;
};

namespace detail {

enum class CharClass { kWord, kApostrophe, kSeparator };

struct DecodedChar {
  char32_t cp;
  std::uint8_t len;  // bytes consumed
  bool valid;
};

inline DecodedChar decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1, true};
  std::size_t len;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
  else return {0xFFFD, 1, false};
  if (i + len > s.size()) return {0xFFFD, 1, false};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1, false};
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return {0xFFFD, 1, false};
  return {cp, static_cast<std::uint8_t>(len), true};
}

inline CharClass classify_codepoint(char32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9')) return CharClass::kWord;
    if (c == '\'') return CharClass::kApostrophe;
    return CharClass::kSeparator;
  }
  if (cp == 0x2019 || cp == 0x02BC) return CharClass::kApostrophe;  // right single quote, modifier apostrophe
  if (cp == 0xFFFD) return CharClass::kSeparator;
  // Latin-1 punctuation and symbols, general punctuation, ideographic space and marks.
  if ((cp >= 0x80 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7) return CharClass::kSeparator;
  if (cp >= 0x2000 && cp <= 0x206F) return CharClass::kSeparator;
  if (cp >= 0x3000 && cp <= 0x303F) return CharClass::kSeparator;
  if (cp == 0xFEFF) return CharClass::kSeparator;
  return CharClass::kWord;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace detail

/// Lowercased word tokens. Whitespace and punctuation split tokens, except an
/// apostrophe (ASCII or U+2019) between two word characters, which is kept
/// as ASCII "'" so "don't" and "don’t" both become "don't". ASCII letters are
/// lowercased; other letters pass through unchanged. Invalid UTF-8 bytes act
/// as separators and are tallied in `diag`.
inline std::vector<std::string> tokenize(std::string_view text, TokenizeDiagnostics* diag = nullptr) {
  struct Item {
    detail::CharClass cls;
    char32_t cp;
  };
  std::vector<Item> items;
  items.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const auto d = detail::decode_utf8(text, i);
    if (!d.valid && diag) ++diag->invalid_utf8_bytes;
    items.push_back({detail::classify_codepoint(d.cp), d.cp});
    i += d.len;
  }
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& it = items[k];
    if (it.cls == detail::CharClass::kWord) {
      char32_t cp = it.cp;
      if (cp >= 'A' && cp <= 'Z') cp += 'a' - 'A';
      detail::append_utf8(cur, cp);
    } else if (it.cls == detail::CharClass::kApostrophe && !cur.empty() && k + 1 < items.size() &&
               items[k + 1].cls == detail::CharClass::kWord) {
      cur += '\'';
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

// ---------------------------------------------------------------------------
// Word lists

inline constexpr std::array kDefaultNegationWords = std::to_array<std::string_view>({
    "not", "no", "never", "none", "nothing", "nobody", "nowhere", "neither", "nor",
    "can't", "cannot", "won't", "don't", "doesn't", "didn't", "isn't", "aren't", "wasn't",
    "weren't", "hasn't", "haven't", "hadn't", "shouldn't", "wouldn't", "couldn't", "mustn't",
});

/// Case-insensitive set of lowercase words.
class WordSet {
 public:
  WordSet() = default;

  template <typename Range>
  explicit WordSet(const Range& words) {
    for (const auto& w : words) insert(std::string(w));
  }

  void insert(std::string w) {
    for (char& c : w) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    if (!w.empty()) words_.insert(std::move(w));
  }

  bool contains(std::string_view w) const { return words_.count(std::string(w)) > 0; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  /// One word per line; blank lines and lines starting with '#' are skipped.
  static WordSet from_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open word list '" + path.string() + "'");
    WordSet s;
    std::string line;
    while (std::getline(is, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      s.insert(line.substr(first));
    }
    if (s.empty()) throw FormatError("word list '" + path.string() + "' is empty");
    return s;
  }

 private:
  std::unordered_set<std::string> words_;
};

/// Negation words; normalizes U+2019 apostrophes to ASCII like the tokenizer.
class NegationLexicon : public WordSet {
 public:
  NegationLexicon() : WordSet(kDefaultNegationWords) {}
  explicit NegationLexicon(WordSet words) : WordSet(std::move(words)) {
    if (empty()) throw DomainError("negation lexicon must not be empty");
  }
};

/// Noun membership with simple plural fallback: "xies" -> "xy", "xes" -> "x",
/// "xs" -> "x".
class NounList : public WordSet {
 public:
  NounList() : WordSet(kDefaultNouns) {}
  explicit NounList(WordSet words) : WordSet(std::move(words)) {}

  bool is_noun(std::string_view w) const {
    if (contains(w)) return true;
    if (w.size() > 3 && w.ends_with("ies")) {
      if (contains(std::string(w.substr(0, w.size() - 3)) + "y")) return true;
    }
    if (w.size() > 2 && w.ends_with("es") && contains(w.substr(0, w.size() - 2))) return true;
    if (w.size() > 1 && w.ends_with("s") && !w.ends_with("ss") && contains(w.substr(0, w.size() - 1))) return true;
    return false;
  }
};

enum class CaptionClass { kNone, kNegative, kNegativeThenNoun };

/// Negative when any token is a negation word; negative-then-noun when some
/// noun appears at a position strictly after the first negation word.
inline CaptionClass classify_caption(const std::vector<std::string>& tokens, const NegationLexicon& lexicon,
                                     const NounList& nouns) {
  std::size_t k = 0;
  while (k < tokens.size() && !lexicon.contains(tokens[k])) ++k;
  if (k == tokens.size()) return CaptionClass::kNone;
  for (std::size_t t = k + 1; t < tokens.size(); ++t) {
    if (nouns.is_noun(tokens[t])) return CaptionClass::kNegativeThenNoun;
  }
  return CaptionClass::kNegative;
}

// ---------------------------------------------------------------------------
// Corpus scanning

struct CorpusStats {
  std::uint64_t total_texts = 0;
  std::uint64_t texts_with_negative = 0;
  std::uint64_t texts_with_negative_then_noun = 0;
  std::uint64_t invalid_utf8_bytes = 0;

  CorpusStats& operator+=(const CorpusStats& o) {
    total_texts += o.total_texts;
    texts_with_negative += o.texts_with_negative;
    texts_with_negative_then_noun += o.texts_with_negative_then_noun;
    invalid_utf8_bytes += o.invalid_utf8_bytes;
    return *this;
  }
  bool operator==(const CorpusStats&) const = default;

  void add(CaptionClass c) {
    ++total_texts;
    if (c != CaptionClass::kNone) ++texts_with_negative;
    if (c == CaptionClass::kNegativeThenNoun) ++texts_with_negative_then_noun;
  }
};

/// How captions are laid out in a shard: one per line, or one column of a
/// CSV/TSV file (0-based column, optional header row).
struct ShardFormat {
  enum class Kind { kText, kCsv, kTsv } kind = Kind::kText;
  std::size_t column = 0;
  bool header = false;
};

/// Parses "txt", "csv", "tsv", "csv:col=N" or "tsv:col=N".
inline ShardFormat parse_shard_format(std::string_view spec) {
  ShardFormat f;
  const auto colon = spec.find(':');
  const auto kind = spec.substr(0, colon);
  if (kind == "txt") f.kind = ShardFormat::Kind::kText;
  else if (kind == "csv") f.kind = ShardFormat::Kind::kCsv;
  else if (kind == "tsv") f.kind = ShardFormat::Kind::kTsv;
  else throw DomainError("unknown format '" + std::string(spec) + "' (expected txt, csv or tsv)");
  if (colon != std::string_view::npos) {
    const auto opt = spec.substr(colon + 1);
    if (f.kind == ShardFormat::Kind::kText || !opt.starts_with("col=")) {
      throw DomainError("bad format option '" + std::string(opt) + "'");
    }
    try {
      f.column = std::stoul(std::string(opt.substr(4)));
    } catch (const std::exception&) {
      throw DomainError("bad column in format '" + std::string(spec) + "'");
    }
  }
  return f;
}

/// Field `column` of one delimited line. CSV fields may be double-quoted with
/// "" escapes; quoted fields spanning lines are not supported.
inline std::optional<std::string> select_column(std::string_view line, char sep, std::size_t column,
                                                bool quoted) {
  std::size_t idx = 0;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted && in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (quoted && c == '"' && cur.empty()) {
      in_quotes = true;
    } else if (c == sep) {
      if (idx == column) return cur;
      ++idx;
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (idx == column) return cur;
  return std::nullopt;
}

/// Scans one shard. Empty lines (and rows lacking the selected column) are
/// not counted as texts.
inline CorpusStats scan_stream(std::istream& is, const NegationLexicon& lexicon, const NounList& nouns,
                               const ShardFormat& format = {}) {
  CorpusStats stats;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && format.header) {
      first = false;
      continue;
    }
    first = false;
    std::string text;
    if (format.kind == ShardFormat::Kind::kText) {
      text = std::move(line);
    } else {
      const bool csv = format.kind == ShardFormat::Kind::kCsv;
      auto field = select_column(line, csv ? ',' : '\t', format.column, csv);
      if (!field) continue;
      text = std::move(*field);
    }
    if (text.empty()) continue;
    TokenizeDiagnostics diag;
    const auto tokens = tokenize(text, &diag);
    stats.invalid_utf8_bytes += diag.invalid_utf8_bytes;
    stats.add(classify_caption(tokens, lexicon, nouns));
  }
  return stats;
}

struct ShardError {
  std::string path;
  std::string message;
};

struct ScanResult {
  CorpusStats stats;
  std::vector<CorpusStats> per_shard;  // input order; zeroed for failed shards
  std::vector<ShardError> errors;
};

using ShardProgress = std::function<void(std::size_t shard, const std::string& path, const CorpusStats&)>;

/// Scans shards on `workers` threads. Each worker pulls whole shards; the
/// totals are merged in input order, so results do not depend on `workers`.
/// Unreadable shards are recorded in `errors` and scanning continues.
inline ScanResult scan_corpus(const std::vector<std::string>& paths, const NegationLexicon& lexicon,
                              const NounList& nouns, std::size_t workers, const ShardFormat& format = {},
                              const ShardProgress& progress = {}) {
  ScanResult result;
  result.per_shard.resize(paths.size());
  std::vector<std::optional<std::string>> failures(paths.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      std::ifstream is(paths[i], std::ios::binary);
      if (!is) {
        failures[i] = "cannot open shard";
        continue;
      }
      result.per_shard[i] = scan_stream(is, lexicon, nouns, format);
      if (is.bad()) {
        failures[i] = "read error";
        result.per_shard[i] = {};
        continue;
      }
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(i, paths[i], result.per_shard[i]);
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, std::max<std::size_t>(1, paths.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (failures[i]) result.errors.push_back({paths[i], *failures[i]});
    else result.stats += result.per_shard[i];
  }
  return result;
}

/// Expands a shell-style pattern in sorted order; a pattern with no wildcard
/// is returned as-is even if the file does not exist.
inline std::vector<std::string> expand_glob(const std::string& pattern) {
  if (pattern.find_first_of("*?[") == std::string::npos) return {pattern};
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("glob failed for '" + pattern + "'");
  std::sort(out.begin(), out.end());
  return out;
}

inline double percent_of(std::uint64_t part, std::uint64_t total) {
  if (total == 0) return 0.0;
  return std::round(10000.0 * static_cast<double>(part) / static_cast<double>(total)) / 100.0;
}

inline nlohmann::json to_json(const ScanResult& r) {
  nlohmann::json j;
  j["total_texts"] = r.stats.total_texts;
  j["texts_with_negative"] = r.stats.texts_with_negative;
  j["texts_with_negative_then_noun"] = r.stats.texts_with_negative_then_noun;
  j["percent_with_negative"] = percent_of(r.stats.texts_with_negative, r.stats.total_texts);
  j["percent_with_negative_then_noun"] = percent_of(r.stats.texts_with_negative_then_noun, r.stats.total_texts);
  j["invalid_utf8_bytes"] = r.stats.invalid_utf8_bytes;
  j["shards"] = r.per_shard.size();
  j["failed_shards"] = nlohmann::json::array();
  for (const auto& e : r.errors) j["failed_shards"].push_back({{"path", e.path}, {"error", e.message}});
  return j;
}

inline std::string summary_text(const CorpusStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "texts: %llu\nwith negative words: %llu (%.2f%%)\nwith a noun after a negative word: %llu (%.2f%%)\n",
                static_cast<unsigned long long>(s.total_texts),
                static_cast<unsigned long long>(s.texts_with_negative),
                percent_of(s.texts_with_negative, s.total_texts),
                static_cast<unsigned long long>(s.texts_with_negative_then_noun),
                percent_of(s.texts_with_negative_then_noun, s.total_texts));
  return buf;
}

}  // namespace mlrpa
