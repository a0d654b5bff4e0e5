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

#include <sstream>

#include "mlrpa/corpuscan.hpp"
#include "oracles.hpp"

namespace mlrpa {
namespace {

const std::filesystem::path kFixtures = MLRPA_FIXTURE_DIR;

using Tokens = std::vector<std::string>;

CaptionClass classify(std::string_view text) {
  static const NegationLexicon lex;
  static const NounList nouns;
  return classify_caption(tokenize(text), lex, nouns);
}

TEST(Tokenize, SplitsAndLowercases) {
  EXPECT_EQ(tokenize("A photo of a DOG."), (Tokens{"a", "photo", "of", "a", "dog"}));
  EXPECT_EQ(tokenize("  Yes i do.......but not with you ! aprons"),
            (Tokens{"yes", "i", "do", "but", "not", "with", "you", "aprons"}));
  EXPECT_EQ(tokenize(""), Tokens{});
}

TEST(Tokenize, KeepsInnerApostrophes) {
  EXPECT_EQ(tokenize("I don't know"), (Tokens{"i", "don't", "know"}));
  EXPECT_EQ(tokenize("I don’t know"), (Tokens{"i", "don't", "know"}));
  EXPECT_EQ(tokenize("'quoted' dogs'"), (Tokens{"quoted", "dogs"}));
}

TEST(Tokenize, CountsInvalidUtf8) {
  TokenizeDiagnostics diag;
  EXPECT_EQ(tokenize("not\xff" "cat", &diag), (Tokens{"not", "cat"}));
  EXPECT_EQ(diag.invalid_utf8_bytes, 1u);
  EXPECT_EQ(tokenize("caf\xc3\xa9", &diag), Tokens{"caf\xc3\xa9"});
  EXPECT_EQ(diag.invalid_utf8_bytes, 1u);
}

TEST(Lexicon, DefaultWords) {
  const NegationLexicon lex;
  EXPECT_EQ(lex.size(), 26u);
  for (const char* w : {"not", "no", "nor", "nobody", "nowhere", "can't", "mustn't"}) EXPECT_TRUE(lex.contains(w)) << w;
  EXPECT_FALSE(lex.contains("know"));
  EXPECT_FALSE(lex.contains("note"));
}

TEST(Nouns, PluralFallback) {
  const NounList nouns(WordSet(std::vector<std::string>{"dog", "box", "city", "glass"}));
  EXPECT_TRUE(nouns.is_noun("dogs"));
  EXPECT_TRUE(nouns.is_noun("boxes"));
  EXPECT_TRUE(nouns.is_noun("cities"));
  EXPECT_TRUE(nouns.is_noun("glass"));
  EXPECT_FALSE(nouns.is_noun("glas"));
  EXPECT_FALSE(nouns.is_noun("cat"));
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify("I'm not getting any younger Magnet"), CaptionClass::kNegativeThenNoun);
  EXPECT_EQ(classify("Problems with the exam - no psychometrics"), CaptionClass::kNegativeThenNoun);
  EXPECT_EQ(classify("a photo of a dog"), CaptionClass::kNone);
  EXPECT_EQ(classify("dog? no"), CaptionClass::kNegative);
  EXPECT_EQ(classify("NOT a photo of a dog"), CaptionClass::kNegativeThenNoun);
  // Nouns before the first negation word do not count.
  EXPECT_EQ(classify("the dog did not"), CaptionClass::kNegative);
}

TEST(Scan, NegativeFixtureCountsEveryCaption) {
  const auto r = scan_corpus({(kFixtures / "negative_captions.txt").string()}, NegationLexicon{}, NounList{}, 1);
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(r.stats.total_texts, 11u);
  EXPECT_EQ(r.stats.texts_with_negative, 11u);
  EXPECT_LE(r.stats.texts_with_negative_then_noun, 11u);
}

TEST(Scan, PositiveFixtureHasNone) {
  const auto r = scan_corpus({(kFixtures / "positive_captions.txt").string()}, NegationLexicon{}, NounList{}, 1);
  EXPECT_EQ(r.stats.total_texts, 4u);
  EXPECT_EQ(r.stats.texts_with_negative, 0u);
}

TEST(Scan, DoubledShardIsAdditiveAndWorkerInvariant) {
  const std::string neg = (kFixtures / "negative_captions.txt").string();
  const std::string pos = (kFixtures / "positive_captions.txt").string();
  const auto one = scan_corpus({neg}, NegationLexicon{}, NounList{}, 1);
  const auto two = scan_corpus({neg, neg}, NegationLexicon{}, NounList{}, 1);
  CorpusStats doubled = one.stats;
  doubled += one.stats;
  EXPECT_EQ(two.stats, doubled);

  const std::vector<std::string> shards{neg, pos, neg, pos, neg};
  const auto serial = scan_corpus(shards, NegationLexicon{}, NounList{}, 1);
  for (std::size_t w : {2u, 3u, 8u}) {
    const auto par = scan_corpus(shards, NegationLexicon{}, NounList{}, w);
    EXPECT_EQ(par.stats, serial.stats);
    EXPECT_EQ(par.per_shard, serial.per_shard);
    EXPECT_EQ(to_json(par).dump(), to_json(serial).dump());
  }
}

TEST(Scan, EmptyAndMissingShards) {
  const auto dir = testing::scratch_dir("scan_empty");
  { std::ofstream(dir / "empty.txt"); }
  const auto r = scan_corpus({(dir / "empty.txt").string(), (dir / "missing.txt").string()}, NegationLexicon{},
                             NounList{}, 2);
  EXPECT_EQ(r.stats, CorpusStats{});
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].path, (dir / "missing.txt").string());
  const auto j = to_json(r);
  EXPECT_EQ(j["percent_with_negative"], 0.0);
  EXPECT_EQ(j["failed_shards"].size(), 1u);
}

TEST(Scan, BlankLinesAndCrlfAreIgnored) {
  std::istringstream is("no dogs\r\n\r\n\na cat\n");
  const auto s = scan_stream(is, NegationLexicon{}, NounList{});
  EXPECT_EQ(s.total_texts, 2u);
  EXPECT_EQ(s.texts_with_negative_then_noun, 1u);
}

TEST(Scan, CsvColumnSelection) {
  std::istringstream is("id,caption\n1,\"no dogs, no cats\"\n2,a cat\n3\n");
  const auto f = parse_shard_format("csv:col=1");
  ShardFormat with_header = f;
  with_header.header = true;
  const auto s = scan_stream(is, NegationLexicon{}, NounList{}, with_header);
  EXPECT_EQ(s.total_texts, 2u);
  EXPECT_EQ(s.texts_with_negative, 1u);
  EXPECT_EQ(select_column("a\tb\tc", '\t', 2, false), "c");
  EXPECT_EQ(select_column("\"x \"\"y\"\"\",z", ',', 0, true), "x \"y\"");
  EXPECT_THROW(parse_shard_format("json"), DomainError);
  EXPECT_THROW(parse_shard_format("txt:col=1"), DomainError);
}

TEST(Scan, ReportFormatting) {
  CorpusStats s{413871335, 1961669, 1366865, 0};
  EXPECT_EQ(percent_of(s.texts_with_negative, s.total_texts), 0.47);
  EXPECT_EQ(percent_of(s.texts_with_negative_then_noun, s.total_texts), 0.33);
  EXPECT_NE(summary_text(s).find("1961669 (0.47%)"), std::string::npos);
}

TEST(Scan, GlobExpansionIsSorted) {
  const auto dir = testing::scratch_dir("scan_glob");
  for (const char* n : {"b.txt", "a.txt", "c.csv"}) std::ofstream(dir / n) << "no dog\n";
  const auto files = expand_glob((dir / "*.txt").string());
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0], (dir / "a.txt").string());
  EXPECT_TRUE(expand_glob((dir / "*.none").string()).empty());
  EXPECT_EQ(expand_glob("plain.txt"), std::vector<std::string>{"plain.txt"});
}

TEST(WordLists, FromFile) {
  const auto dir = testing::scratch_dir("wordlist");
  std::ofstream(dir / "w.txt") << "# comment\nNever\n\n  nope \n";
  const auto w = WordSet::from_file(dir / "w.txt");
  EXPECT_EQ(w.size(), 2u);
  EXPECT_TRUE(w.contains("never"));
  EXPECT_TRUE(w.contains("nope"));
  std::ofstream(dir / "e.txt") << "# only\n";
  EXPECT_THROW(WordSet::from_file(dir / "e.txt"), FormatError);
  EXPECT_THROW(WordSet::from_file(dir / "none.txt"), IoError);
}

}  // namespace
}  // namespace mlrpa
