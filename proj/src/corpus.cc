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

#include "imrc/corpus.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "imrc/digest.h"
#include "imrc/status.h"
#include "json.hpp"

namespace imrc {
namespace {

using nlohmann::json;

[[noreturn]] void SchemaError(const std::string &what,
                              const std::string &qa_id = "") {
  std::string message = "schema violation: " + what;
  if (!qa_id.empty()) message += " (question id " + qa_id + ")";
  throw Error(ErrorCode::kSchemaError, message);
}

const json &Field(const json &object, const char *name, const char *where,
                  const std::string &qa_id = "") {
  if (!object.is_object()) SchemaError(std::string(where) + " is not an object", qa_id);
  auto it = object.find(name);
  if (it == object.end()) {
    SchemaError(std::string("missing field '") + name + "' in " + where, qa_id);
  }
  return *it;
}

std::string StringField(const json &object, const char *name,
                        const char *where, const std::string &qa_id = "") {
  const json &value = Field(object, name, where, qa_id);
  if (!value.is_string()) {
    SchemaError(std::string("field '") + name + "' in " + where +
                    " is not a string",
                qa_id);
  }
  return value.get<std::string>();
}

const json &ArrayField(const json &object, const char *name,
                       const char *where, const std::string &qa_id = "") {
  const json &value = Field(object, name, where, qa_id);
  if (!value.is_array()) {
    SchemaError(std::string("field '") + name + "' in " + where +
                    " is not an array",
                qa_id);
  }
  return value;
}

// Byte offset of a code-point offset, or nullopt when out of range.
std::optional<size_t> ByteOffset(const std::vector<size_t> &offsets,
                                 int64_t code_point) {
  if (code_point < 0 || static_cast<size_t>(code_point) >= offsets.size()) {
    return std::nullopt;
  }
  return offsets[static_cast<size_t>(code_point)];
}

std::optional<size_t> AlignAnswer(const Document &document,
                                  std::span<const SentenceSpan> spans,
                                  std::optional<size_t> answer_byte,
                                  const TokenSeq &tokens) {
  if (tokens.empty()) return std::nullopt;
  if (answer_byte.has_value()) {
    for (size_t i = 0; i < spans.size(); ++i) {
      if (*answer_byte < spans[i].end) {
        if (ContainsSubsequence(document.normalized[i], tokens)) return i;
        break;
      }
    }
  }
  for (size_t i = 0; i < document.normalized.size(); ++i) {
    if (ContainsSubsequence(document.normalized[i], tokens)) return i;
  }
  return std::nullopt;
}

std::shared_ptr<const Document> Segment(std::string_view context,
                                        std::vector<SentenceSpan> &spans) {
  spans = SplitSentenceSpans(context);
  std::vector<std::string> raw;
  raw.reserve(spans.size());
  for (const SentenceSpan &span : spans) {
    raw.emplace_back(context.substr(span.begin, span.end - span.begin));
  }
  return Document::FromSentences(std::move(raw));
}

GamePtr BuildGame(std::string game_id, std::string title,
                  std::string_view context,
                  const std::shared_ptr<const Document> &document,
                  std::span<const SentenceSpan> spans,
                  const std::vector<size_t> &offsets, std::string question,
                  const std::vector<RawAnswer> &raw_answers) {
  std::vector<Answer> answers;
  answers.reserve(raw_answers.size());
  for (const RawAnswer &raw : raw_answers) {
    Answer answer;
    answer.text = raw.text;
    answer.answer_start = raw.answer_start;
    answer.tokens = NormalizeTokens(Tokenize(raw.text));
    std::optional<size_t> byte = ByteOffset(offsets, raw.answer_start);
    if (byte.has_value() && *byte >= context.size()) byte.reset();
    answer.sentence = AlignAnswer(*document, spans, byte, answer.tokens);
    answers.push_back(std::move(answer));
  }
  return MakeGameFromDocument(std::move(game_id), std::move(title), document,
                              std::move(question), std::move(answers));
}

std::string WithThousands(size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

json StatsJson(const CorpusStats &stats) {
  return json{{"game_count", stats.game_count},
              {"aligned_count", stats.aligned_count},
              {"vocab_size", stats.vocab_size},
              {"avg_sentences_per_doc", stats.avg_sentences_per_doc},
              {"avg_sentence_length", stats.avg_sentence_length},
              {"avg_question_length", stats.avg_question_length}};
}

json OptionsJson(const ConvertOptions &options) {
  json out{{"split", options.split},
           {"vocabulary_cap", options.vocabulary_cap},
           {"first_article", options.first_article},
           {"sentence_splitter_version", kSentenceSplitterVersion},
           {"tokenizer_version", kTokenizerVersion}};
  out["article_count"] = options.article_count.has_value()
                             ? json(*options.article_count)
                             : json(nullptr);
  return out;
}

}  // namespace

size_t RawDataset::QuestionCount() const {
  size_t count = 0;
  for (const RawArticle &article : articles) {
    for (const RawParagraph &paragraph : article.paragraphs) {
      count += paragraph.qas.size();
    }
  }
  return count;
}

RawDataset ParseSquadFormat(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParseError,
                "malformed JSON at byte " + std::to_string(e.byte) + ": " +
                    e.what());
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  RawDataset dataset;
  if (!root.is_object()) SchemaError("top level is not an object");
  if (auto it = root.find("version"); it != root.end() && it->is_string()) {
    dataset.version = it->get<std::string>();
  }
  std::unordered_set<std::string> seen_ids;
  for (const json &article_json : ArrayField(root, "data", "top level")) {
    RawArticle article;
    if (article_json.is_object()) {
      if (auto it = article_json.find("title");
          it != article_json.end() && it->is_string()) {
        article.title = it->get<std::string>();
      }
    }
    for (const json &paragraph_json :
         ArrayField(article_json, "paragraphs", "article")) {
      RawParagraph paragraph;
      paragraph.context = StringField(paragraph_json, "context", "paragraph");
      const std::vector<size_t> offsets = CodePointOffsets(paragraph.context);
      const size_t code_points = offsets.size() - 1;
      for (const json &qa_json : ArrayField(paragraph_json, "qas", "paragraph")) {
        RawQuestion qa;
        qa.id = StringField(qa_json, "id", "qa");
        qa.question = StringField(qa_json, "question", "qa", qa.id);
        if (!seen_ids.insert(qa.id).second) {
          SchemaError("duplicate question id", qa.id);
        }
        const json &answers = ArrayField(qa_json, "answers", "qa", qa.id);
        if (answers.empty()) SchemaError("question has no answers", qa.id);
        for (const json &answer_json : answers) {
          RawAnswer answer;
          answer.text = StringField(answer_json, "text", "answer", qa.id);
          const json &start = Field(answer_json, "answer_start", "answer", qa.id);
          if (!start.is_number_integer()) {
            SchemaError("field 'answer_start' is not an integer", qa.id);
          }
          answer.answer_start = start.get<int64_t>();
          const size_t length = CodePointOffsets(answer.text).size() - 1;
          if (answer.answer_start < 0 ||
              static_cast<size_t>(answer.answer_start) + length > code_points) {
            SchemaError("answer_start " + std::to_string(answer.answer_start) +
                            " is past the end of the context",
                        qa.id);
          }
          const size_t begin = offsets[answer.answer_start];
          const size_t end = offsets[answer.answer_start + length];
          if (paragraph.context.compare(begin, end - begin, answer.text) != 0) {
            SchemaError("answer text does not occur at answer_start " +
                            std::to_string(answer.answer_start),
                        qa.id);
          }
          qa.answers.push_back(std::move(answer));
        }
        paragraph.qas.push_back(std::move(qa));
      }
      article.paragraphs.push_back(std::move(paragraph));
    }
    dataset.articles.push_back(std::move(article));
  }
  return dataset;
}

std::string ReadFileToString(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

RawDataset LoadSquadFormat(const std::filesystem::path &path) {
  return ParseSquadFormat(ReadFileToString(path));
}

std::shared_ptr<const Document> Document::FromSentences(
    std::vector<std::string> raw_sentences) {
  auto document = std::make_shared<Document>();
  document->sentences.reserve(raw_sentences.size());
  document->normalized.reserve(raw_sentences.size());
  for (const std::string &sentence : raw_sentences) {
    document->sentences.push_back(Tokenize(sentence));
    document->normalized.push_back(NormalizeTokens(document->sentences.back()));
  }
  document->raw_sentences = std::move(raw_sentences);
  return document;
}

bool GameSpec::aligned() const {
  return std::any_of(answers.begin(), answers.end(),
                     [](const Answer &a) { return a.sentence.has_value(); });
}

GamePtr MakeGameFromDocument(std::string game_id, std::string title,
                             std::shared_ptr<const Document> document,
                             std::string question,
                             std::vector<Answer> answers) {
  auto game = std::make_shared<GameSpec>();
  game->game_id = std::move(game_id);
  game->title = std::move(title);
  game->document = std::move(document);
  game->question_tokens = Tokenize(question);
  game->normalized_question = NormalizeTokens(game->question_tokens);
  game->question = std::move(question);
  game->answers = std::move(answers);
  return game;
}

GamePtr MakeGame(std::string game_id, std::string title,
                 std::string_view context, std::string question,
                 const std::vector<RawAnswer> &answers) {
  std::vector<SentenceSpan> spans;
  auto document = Segment(context, spans);
  return BuildGame(std::move(game_id), std::move(title), context, document,
                   spans, CodePointOffsets(context), std::move(question),
                   answers);
}

std::vector<GamePtr> MakeGames(const RawDataset &dataset) {
  std::vector<GamePtr> games;
  games.reserve(dataset.QuestionCount());
  for (const RawArticle &article : dataset.articles) {
    for (const RawParagraph &paragraph : article.paragraphs) {
      std::vector<SentenceSpan> spans;
      auto document = Segment(paragraph.context, spans);
      const std::vector<size_t> offsets = CodePointOffsets(paragraph.context);
      for (const RawQuestion &qa : paragraph.qas) {
        games.push_back(BuildGame(qa.id, article.title, paragraph.context,
                                  document, spans, offsets, qa.question,
                                  qa.answers));
      }
    }
  }
  return games;
}

Vocabulary Vocabulary::FromCounts(
    const std::unordered_map<std::string, uint64_t> &counts, size_t cap) {
  std::vector<std::pair<std::string_view, uint64_t>> entries;
  entries.reserve(counts.size());
  for (const auto &[token, count] : counts) entries.emplace_back(token, count);
  const auto by_rank = [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  const size_t keep = std::min(cap, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(),
                    by_rank);
  std::vector<std::string> tokens;
  std::vector<uint64_t> frequencies;
  tokens.reserve(keep);
  frequencies.reserve(keep);
  for (size_t i = 0; i < keep; ++i) {
    tokens.emplace_back(entries[i].first);
    frequencies.push_back(entries[i].second);
  }
  return FromRanked(std::move(tokens), std::move(frequencies), cap);
}

Vocabulary Vocabulary::FromRanked(std::vector<std::string> tokens,
                                  std::vector<uint64_t> frequencies,
                                  size_t cap) {
  if (tokens.size() != frequencies.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "vocabulary tokens and frequencies differ in length");
  }
  if (tokens.size() > cap) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary exceeds its cap");
  }
  Vocabulary vocab;
  vocab.cap_ = cap;
  vocab.index_.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!vocab.index_.emplace(tokens[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary token '" + tokens[i] + "'");
    }
  }
  std::string joined;
  for (const std::string &token : tokens) {
    joined += token;
    joined += '\n';
  }
  vocab.hash_ = Sha256Hex(joined);
  vocab.tokens_ = std::move(tokens);
  vocab.frequencies_ = std::move(frequencies);
  return vocab;
}

std::optional<size_t> Vocabulary::Lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

uint64_t Vocabulary::Frequency(std::string_view token) const {
  std::optional<size_t> index = Lookup(token);
  return index.has_value() ? frequencies_[*index] : 0;
}


Vocabulary BuildVocabulary(const RawDataset &dataset, size_t cap) {
  if (cap < 1) throw Error(ErrorCode::kInvalidArgument, "vocabulary cap must be >= 1");
  std::unordered_map<std::string, uint64_t> counts;
  const auto count = [&](std::string_view text) {
    for (const std::string &token : Tokenize(text)) {
      ++counts[NormalizeToken(token)];
    }
  };
  for (const RawArticle &article : dataset.articles) {
    for (const RawParagraph &paragraph : article.paragraphs) {
      count(paragraph.context);
      for (const RawQuestion &qa : paragraph.qas) count(qa.question);
    }
  }
  return Vocabulary::FromCounts(counts, cap);
}

CorpusStats ComputeStats(std::span<const GamePtr> games,
                         const Vocabulary &vocab) {
  if (games.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot compute statistics of an empty game list");
  }
  CorpusStats stats;
  stats.game_count = games.size();
  stats.vocab_size = vocab.size();
  size_t sentences = 0;
  size_t sentence_tokens = 0;
  size_t question_tokens = 0;
  for (const GamePtr &game : games) {
    if (game->aligned()) ++stats.aligned_count;
    sentences += game->sentence_count();
    for (const TokenSeq &sentence : game->document->sentences) {
      sentence_tokens += sentence.size();
    }
    question_tokens += game->question_tokens.size();
  }
  const double n = static_cast<double>(games.size());
  stats.avg_sentences_per_doc = static_cast<double>(sentences) / n;
  stats.avg_sentence_length =
      sentences == 0 ? 0.0
                     : static_cast<double>(sentence_tokens) /
                           static_cast<double>(sentences);
  stats.avg_question_length = static_cast<double>(question_tokens) / n;
  return stats;
}

std::string FormatStatsTable(const CorpusStats &stats, std::string_view name) {
  char buffer[64];
  const auto row = [](std::string_view label, const std::string &value) {
    std::string line(label);
    line.resize(28, ' ');
    return line + "| " + value + "\n";
  };
  const auto fixed = [&](double value) {
    std::snprintf(buffer, sizeof(buffer), "%.2f", value);
    return std::string(buffer);
  };
  std::string out = row("Dataset", std::string(name));
  out += std::string(28, '-') + "+" + std::string(14, '-') + "\n";
  out += row("#Games", WithThousands(stats.game_count));
  out += row("#Aligned Games", WithThousands(stats.aligned_count));
  out += row("Vocabulary Size", WithThousands(stats.vocab_size));
  out += row("Avg. #Sentence / Document", fixed(stats.avg_sentences_per_doc));
  out += row("Avg. Sentence Length", fixed(stats.avg_sentence_length));
  out += row("Avg. Question Length", fixed(stats.avg_question_length));
  return out;
}

std::string StatsToJson(const CorpusStats &stats) {
  return StatsJson(stats).dump();
}

const GamePtr *Corpus::Find(std::string_view game_id) const {
  for (const GamePtr &game : games) {
    if (game->game_id == game_id) return &game;
  }
  return nullptr;
}

Corpus BuildCorpus(const RawDataset &dataset, const ConvertOptions &options,
                   std::string source_name, std::string source_sha256) {
  RawDataset window;
  window.version = dataset.version;
  const size_t first = std::min(options.first_article, dataset.articles.size());
  size_t last = dataset.articles.size();
  if (options.article_count.has_value()) {
    last = std::min(last, first + *options.article_count);
  }
  window.articles.assign(dataset.articles.begin() + first,
                         dataset.articles.begin() + last);
  if (window.QuestionCount() == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "input selects no questions; refusing to write an empty corpus");
  }
  Corpus corpus;
  corpus.source = std::move(source_name);
  corpus.source_sha256 = std::move(source_sha256);
  corpus.options = options;
  corpus.games = MakeGames(window);
  corpus.vocabulary = std::make_shared<const Vocabulary>(
      BuildVocabulary(window, options.vocabulary_cap));
  corpus.stats = ComputeStats(corpus.games, *corpus.vocabulary);
  json config{{"source_sha256", corpus.source_sha256},
              {"options", OptionsJson(options)},
              {"format_version", kCorpusFormatVersion}};
  corpus.config_hash = Sha256Hex(config.dump());
  return corpus;
}

std::string SerializeCorpus(Corpus &corpus) {
  json header{{"type", "header"},
              {"format", "imrc-corpus"},
              {"version", kCorpusFormatVersion},
              {"source", corpus.source},
              {"source_sha256", corpus.source_sha256},
              {"options", OptionsJson(corpus.options)},
              {"config_hash", corpus.config_hash},
              {"stats", StatsJson(corpus.stats)}};
  const Vocabulary &vocab = *corpus.vocabulary;
  header["vocabulary"] = json{{"cap", vocab.cap()},
                              {"tokens", vocab.tokens()},
                              {"counts", vocab.frequencies()}};
  std::string out = header.dump();
  out += '\n';
  for (const GamePtr &game : corpus.games) {
    json answers = json::array();
    for (const Answer &answer : game->answers) {
      answers.push_back(json{
          {"text", answer.text},
          {"answer_start", answer.answer_start},
          {"sentence", answer.sentence.has_value() ? json(*answer.sentence)
                                                   : json(nullptr)}});
    }
    json record{{"type", "game"},
                {"id", game->game_id},
                {"title", game->title},
                {"sentences", game->document->raw_sentences},
                {"question", game->question},
                {"answers", std::move(answers)},
                {"aligned", game->aligned()}};
    out += record.dump();
    out += '\n';
  }
  corpus.content_hash = Sha256Hex(out);
  return out;
}

void WriteCorpus(const std::filesystem::path &path, Corpus &corpus) {
  const std::string text = SerializeCorpus(corpus);
  const std::filesystem::path temp = path.string() + ".partial";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + temp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + temp.string());
  }
  std::filesystem::rename(temp, path);
}

Corpus ParseCorpus(std::string_view text) {
  Corpus corpus;
  corpus.content_hash = Sha256Hex(text);
  size_t line_number = 0;
  size_t pos = 0;
  std::shared_ptr<const Document> last_document;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line.begin(), line.end());
    } catch (const json::parse_error &e) {
      throw Error(ErrorCode::kParseError,
                  "corpus line " + std::to_string(line_number) + " byte " +
                      std::to_string(e.byte) + ": malformed JSON");
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError,
                  "corpus line " + std::to_string(line_number) + ": " + e.what());
    }
    try {
      if (line_number == 1) {
        if (record.value("format", "") != "imrc-corpus") {
          throw Error(ErrorCode::kSchemaError, "not an imrc corpus file");
        }
        if (record.at("version").get<int>() != kCorpusFormatVersion) {
          throw Error(ErrorCode::kVersionMismatch,
                      "corpus format version " +
                          record.at("version").dump() + " is not supported");
        }
        corpus.source = record.at("source").get<std::string>();
        corpus.source_sha256 = record.at("source_sha256").get<std::string>();
        corpus.config_hash = record.at("config_hash").get<std::string>();
        const json &options = record.at("options");
        corpus.options.split = options.at("split").get<std::string>();
        corpus.options.vocabulary_cap = options.at("vocabulary_cap").get<size_t>();
        corpus.options.first_article = options.at("first_article").get<size_t>();
        if (!options.at("article_count").is_null()) {
          corpus.options.article_count = options.at("article_count").get<size_t>();
        }
        const json &stats = record.at("stats");
        corpus.stats.game_count = stats.at("game_count").get<size_t>();
        corpus.stats.aligned_count = stats.at("aligned_count").get<size_t>();
        corpus.stats.vocab_size = stats.at("vocab_size").get<size_t>();
        corpus.stats.avg_sentences_per_doc = stats.at("avg_sentences_per_doc").get<double>();
        corpus.stats.avg_sentence_length = stats.at("avg_sentence_length").get<double>();
        corpus.stats.avg_question_length = stats.at("avg_question_length").get<double>();
        const json &vocab = record.at("vocabulary");
        corpus.vocabulary = std::make_shared<const Vocabulary>(Vocabulary::FromRanked(
            vocab.at("tokens").get<std::vector<std::string>>(),
            vocab.at("counts").get<std::vector<uint64_t>>(),
            vocab.at("cap").get<size_t>()));
        continue;
      }
      auto raw_sentences = record.at("sentences").get<std::vector<std::string>>();
      if (raw_sentences.empty()) {
        throw Error(ErrorCode::kSchemaError, "game has no sentences");
      }
      std::shared_ptr<const Document> document;
      if (last_document && last_document->raw_sentences == raw_sentences) {
        document = last_document;
      } else {
        document = Document::FromSentences(std::move(raw_sentences));
        last_document = document;
      }
      std::vector<Answer> answers;
      for (const json &answer_json : record.at("answers")) {
        Answer answer;
        answer.text = answer_json.at("text").get<std::string>();
        answer.answer_start = answer_json.at("answer_start").get<int64_t>();
        answer.tokens = NormalizeTokens(Tokenize(answer.text));
        if (!answer_json.at("sentence").is_null()) {
          answer.sentence = answer_json.at("sentence").get<size_t>();
          if (*answer.sentence >= document->sentences.size()) {
            throw Error(ErrorCode::kSchemaError, "answer sentence out of range");
          }
        }
        answers.push_back(std::move(answer));
      }
      corpus.games.push_back(MakeGameFromDocument(
          record.at("id").get<std::string>(), record.value("title", ""),
          document, record.at("question").get<std::string>(),
          std::move(answers)));
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kSchemaError, "corpus line " +
                                               std::to_string(line_number) +
                                               ": " + e.what());
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kVersionMismatch) throw;
      throw Error(e.code(),
                  "corpus line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  if (!corpus.vocabulary) throw Error(ErrorCode::kSchemaError, "corpus has no header");
  return corpus;
}

Corpus ReadCorpus(const std::filesystem::path &path) {
  return ParseCorpus(ReadFileToString(path));
}

}  // namespace imrc
