// Copyright 2026 The iMRC Engine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IMRC_CORPUS_H_
#define IMRC_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "imrc/text.h"

namespace imrc {

// ---------------------------------------------------------------------------
// Raw SQuAD v1.1 schema.

struct RawAnswer {
  std::string text;
  // Code-point offset into the context, as in the upstream JSON.
  int64_t answer_start = 0;
};

struct RawQuestion {
  std::string id;
  std::string question;
  std::vector<RawAnswer> answers;
};

struct RawParagraph {
  std::string context;
  std::vector<RawQuestion> qas;
};

struct RawArticle {
  std::string title;
  std::vector<RawParagraph> paragraphs;
};

struct RawDataset {
  std::string version;
  std::vector<RawArticle> articles;

  size_t QuestionCount() const;
};

// Throws Error(kParseError) with the byte offset for malformed JSON and
// Error(kSchemaError) naming the missing field (and question id when known)
// for schema violations, including answers that do not sit at answer_start.
RawDataset ParseSquadFormat(std::string_view json_text);
RawDataset LoadSquadFormat(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// Games.

// One segmented paragraph, shared by every question asked about it.
struct Document {
  std::vector<std::string> raw_sentences;
  std::vector<TokenSeq> sentences;   // display tokens
  std::vector<TokenSeq> normalized;  // matching tokens

  static std::shared_ptr<const Document> FromSentences(
      std::vector<std::string> raw_sentences);
};

struct Answer {
  std::string text;
  int64_t answer_start = -1;
  TokenSeq tokens;  // normalized
  // Zero-based sentence whose tokens contain `tokens` contiguously.
  std::optional<size_t> sentence;
};

struct GameSpec {
  std::string game_id;
  std::string title;
  std::shared_ptr<const Document> document;
  std::string question;
  TokenSeq question_tokens;
  TokenSeq normalized_question;
  std::vector<Answer> answers;

  size_t sentence_count() const { return document->sentences.size(); }
  bool aligned() const;
};

using GamePtr = std::shared_ptr<const GameSpec>;

// Aligns `answers` against the segmented `context`. `answer_start` values
// are code-point offsets; -1 means unknown and skips the preferred-sentence
// lookup.
GamePtr MakeGame(std::string game_id, std::string title,
                 std::string_view context, std::string question,
                 const std::vector<RawAnswer> &answers);

// Same as MakeGame but reuses an already segmented document.
GamePtr MakeGameFromDocument(std::string game_id, std::string title,
                             std::shared_ptr<const Document> document,
                             std::string question,
                             std::vector<Answer> answers);

// One game per question, in input order.
std::vector<GamePtr> MakeGames(const RawDataset &dataset);

// ---------------------------------------------------------------------------
// Vocabulary.

class Vocabulary {
 public:
  Vocabulary() = default;

  // Keeps the `cap` most frequent tokens, ties broken lexicographically.
  static Vocabulary FromCounts(
      const std::unordered_map<std::string, uint64_t> &counts, size_t cap);

  // Tokens must already be in rank order.
  static Vocabulary FromRanked(std::vector<std::string> tokens,
                               std::vector<uint64_t> frequencies, size_t cap);

  const std::vector<std::string> &tokens() const { return tokens_; }
  const std::vector<uint64_t> &frequencies() const { return frequencies_; }
  size_t cap() const { return cap_; }
  size_t size() const { return tokens_.size(); }

  std::optional<size_t> Lookup(std::string_view token) const;
  bool Contains(std::string_view token) const {
    return Lookup(token).has_value();
  }
  // Zero for tokens outside the retained set.
  uint64_t Frequency(std::string_view token) const;

  // SHA-256 over the retained tokens in order.
  const std::string &Hash() const { return hash_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<uint64_t> frequencies_;
  std::unordered_map<std::string, size_t> index_;
  size_t cap_ = 0;
  std::string hash_;
};

// Counts lowercased tokens over every context (once per paragraph) and every
// question.
Vocabulary BuildVocabulary(const RawDataset &dataset, size_t cap);

// ---------------------------------------------------------------------------
// Statistics.

struct CorpusStats {
  size_t game_count = 0;
  size_t aligned_count = 0;
  size_t vocab_size = 0;
  double avg_sentences_per_doc = 0.0;
  double avg_sentence_length = 0.0;
  double avg_question_length = 0.0;
};

// Averages are taken over games; sentence and question lengths are in tokens.
// Throws Error(kInvalidArgument) on an empty game list.
CorpusStats ComputeStats(std::span<const GamePtr> games,
                         const Vocabulary &vocab);

// Two-column "Dataset | value" table.
std::string FormatStatsTable(const CorpusStats &stats, std::string_view name);
std::string StatsToJson(const CorpusStats &stats);

// ---------------------------------------------------------------------------
// Corpus file: newline-delimited JSON, a header record then one game per line.

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr size_t kDefaultVocabularyCap = 200000;

struct ConvertOptions {
  std::string split = "train";
  size_t vocabulary_cap = kDefaultVocabularyCap;
  size_t first_article = 0;
  std::optional<size_t> article_count;
};

struct Corpus {
  std::string source;
  std::string source_sha256;
  ConvertOptions options;
  std::string config_hash;
  CorpusStats stats;
  std::vector<GamePtr> games;
  std::shared_ptr<const Vocabulary> vocabulary;
  // SHA-256 of the serialized file; filled by ReadCorpus / WriteCorpus.
  std::string content_hash;

  const GamePtr *Find(std::string_view game_id) const;
};

// Applies the article window, builds games, vocabulary and statistics.
// Throws Error(kInvalidArgument) when the window selects no questions.
Corpus BuildCorpus(const RawDataset &dataset, const ConvertOptions &options,
                   std::string source_name, std::string source_sha256);

// Serializes deterministically and records content_hash on `corpus`.
std::string SerializeCorpus(Corpus &corpus);
void WriteCorpus(const std::filesystem::path &path, Corpus &corpus);

Corpus ParseCorpus(std::string_view text);
Corpus ReadCorpus(const std::filesystem::path &path);

std::string ReadFileToString(const std::filesystem::path &path);

}  // namespace imrc

#endif  // IMRC_CORPUS_H_
