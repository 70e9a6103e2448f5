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

#include "imrc/agents.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iterator>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "imrc/status.h"

namespace imrc {
namespace {

constexpr std::string_view kStopwords[] = {
    "a",      "about", "after",  "all",     "also",  "am",    "an",
    "and",    "any",   "are",    "as",      "at",    "be",    "been",
    "before", "being", "between", "both",   "but",   "by",    "can",
    "could",  "did",   "do",     "does",    "during", "each", "few",
    "for",    "from",  "had",    "has",     "have",  "he",    "her",
    "here",   "his",   "how",    "i",       "if",    "in",    "into",
    "is",     "it",    "its",    "many",    "may",   "me",    "might",
    "more",   "most",  "much",   "must",    "my",    "no",    "not",
    "of",     "on",    "once",   "only",    "or",    "other", "our",
    "over",   "own",   "s",      "same",    "shall", "she",   "should",
    "so",     "some",  "such",   "than",    "that",  "the",   "their",
    "them",   "then",  "there",  "these",   "they",  "this",  "those",
    "to",     "too",   "under",  "up",      "very",  "was",   "we",
    "were",   "what",  "when",   "where",   "which", "while", "who",
    "whom",   "whose", "why",    "will",    "with",  "would", "you",
    "your",
};

bool IsStopword(std::string_view token) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), token) !=
         std::end(kStopwords);
}

bool HasAlnum(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') ||
           (u >= 'A' && u <= 'Z');
  });
}

std::vector<std::string> AnswerTexts(const GameSpec &game) {
  std::vector<std::string> truths;
  truths.reserve(game.answers.size());
  for (const Answer &answer : game.answers) truths.push_back(answer.text);
  return truths;
}

class RandomAgent : public Agent {
 public:
  explicit RandomAgent(uint64_t seed) : rng_(seed) {}

  std::string_view name() const override { return "random"; }

  Action Act(const EnvState &state, const Observation &observation) override {
    std::vector<ActionKind> moves;
    for (ActionKind kind : observation.legal_actions) {
      if (kind == ActionKind::kStop) continue;
      if (kind == ActionKind::kCtrlf && observation.legal_queries.empty()) continue;
      moves.push_back(kind);
    }
    const double stop_probability =
        std::max(1.0 / static_cast<double>(moves.size() + 1),
                 1.0 / static_cast<double>(state.config().max_steps));
    if (moves.empty() || Uniform() < stop_probability) return Action::Stop();
    const ActionKind kind = moves[rng_() % moves.size()];
    if (kind != ActionKind::kCtrlf) return {kind, {}};
    const std::vector<std::string> &tokens = observation.legal_queries.tokens();
    return Action::Ctrlf(tokens[rng_() % tokens.size()]);
  }

  std::string Predict(const EnvState &, const Observation &final_observation) override {
    return final_observation.Text();
  }

 private:
  double Uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 rng_;
};

class CyclingReader : public Agent {
 public:
  std::string_view name() const override { return "cycling_reader"; }

  Action Act(const EnvState &state, const Observation &observation) override {
    if (SufficientInfo(state) || !observation.IsLegal(ActionKind::kNext)) {
      return Action::Stop();
    }
    return Action::Next();
  }

  std::string Predict(const EnvState &state, const Observation &final_observation) override {
    return GoldExtract(final_observation.observation_tokens, AnswerTexts(state.game()));
  }
};

class QuestionSearcher : public Agent {
 public:
  explicit QuestionSearcher(std::shared_ptr<const Vocabulary> frequency_table)
      : frequency_table_(std::move(frequency_table)) {}

  std::string_view name() const override { return "question_searcher"; }

  void Begin(const EnvState &state, const Observation &) override {
    order_ = QuestionSearchOrder(state.game(), *frequency_table_,
                                 state.config().query_type,
                                 state.vocabulary().get());
    current_ = 0;
    visited_.clear();
    issued_ = false;
  }

  Action Act(const EnvState &state, const Observation &observation) override {
    if (SufficientInfo(state)) return Action::Stop();
    if (order_.empty()) {
      return observation.IsLegal(ActionKind::kNext) ? Action::Next() : Action::Stop();
    }
    if (issued_) {
      const bool found = state.history().back().info.query_found.value_or(false);
      if (!found || !visited_.insert(state.cursor()).second) {
        current_ = (current_ + 1) % order_.size();
        visited_.clear();
      }
    }
    issued_ = true;
    return Action::Ctrlf(order_[current_]);
  }

  std::string Predict(const EnvState &state, const Observation &final_observation) override {
    return GoldExtract(final_observation.observation_tokens, AnswerTexts(state.game()));
  }

 private:
  std::shared_ptr<const Vocabulary> frequency_table_;
  std::vector<std::string> order_;
  size_t current_ = 0;
  std::unordered_set<size_t> visited_;
  bool issued_ = false;
};

class OracleNavigator : public Agent {
 public:
  std::string_view name() const override { return "oracle_navigator"; }

  bool Declines(const GameSpec &game) const override { return !game.aligned(); }

  void Begin(const EnvState &state, const Observation &) override {
    plan_ = PlanShortestPath(state.game(), state.config(), state.vocabulary().get())
                .value_or(std::vector<Action>{});
    next_ = 0;
  }

  Action Act(const EnvState &, const Observation &) override {
    if (next_ < plan_.size()) return plan_[next_++];
    return Action::Stop();
  }

  std::string Predict(const EnvState &state, const Observation &final_observation) override {
    return GoldExtract(final_observation.observation_tokens, AnswerTexts(state.game()));
  }

 private:
  std::vector<Action> plan_;
  size_t next_ = 0;
};

// Bag of normalized answer words with per-truth overlap tracking, used by the
// span search in GoldExtract.
struct TruthBag {
  std::unordered_map<std::string, int> counts;
  size_t length = 0;
};

double F1FromCounts(size_t overlap, size_t predicted, size_t truth) {
  if (predicted == 0 || truth == 0) return predicted == truth ? 1.0 : 0.0;
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(predicted);
  const double recall = static_cast<double>(overlap) / static_cast<double>(truth);
  return 2.0 * precision * recall / (precision + recall);
}

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::string_view kAgentNames[] = {"random", "cycling_reader",
                                            "question_searcher", "oracle_navigator"};

}  // namespace

std::unique_ptr<Agent> MakeRandomAgent(uint64_t seed) {
  return std::make_unique<RandomAgent>(seed);
}

std::unique_ptr<Agent> MakeCyclingReader() { return std::make_unique<CyclingReader>(); }

std::unique_ptr<Agent> MakeQuestionSearcher(
    std::shared_ptr<const Vocabulary> frequency_table) {
  if (!frequency_table) {
    throw Error(ErrorCode::kInvalidArgument, "question_searcher needs a frequency table");
  }
  return std::make_unique<QuestionSearcher>(std::move(frequency_table));
}

std::unique_ptr<Agent> MakeOracleNavigator() { return std::make_unique<OracleNavigator>(); }

std::span<const std::string_view> Stopwords() { return kStopwords; }

std::vector<std::string> QuestionSearchOrder(const GameSpec &game,
                                             const Vocabulary &frequency_table,
                                             QueryType query_type,
                                             const Vocabulary *vocabulary) {
  std::vector<std::string> order;
  for (const std::string &token : game.normalized_question) {
    if (!HasAlnum(token) || IsStopword(token)) continue;
    if (frequency_table.Frequency(token) == 0) continue;
    if (query_type == QueryType::kVocabulary &&
        (vocabulary == nullptr || !vocabulary->Contains(token))) {
      continue;
    }
    if (std::find(order.begin(), order.end(), token) == order.end()) {
      order.push_back(token);
    }
  }
  std::sort(order.begin(), order.end(), [&](const std::string &a, const std::string &b) {
    const uint64_t fa = frequency_table.Frequency(a);
    const uint64_t fb = frequency_table.Frequency(b);
    if (fa != fb) return fa < fb;
    return a < b;
  });
  return order;
}

std::optional<std::vector<Action>> PlanShortestPath(const GameSpec &game,
                                                    const EnvConfig &config,
                                                    const Vocabulary *vocabulary) {
  const Document &document = *game.document;
  const size_t n = document.sentences.size();
  std::vector<bool> target(n, false);
  for (size_t i = 0; i < n; ++i) {
    for (const Answer &answer : game.answers) {
      if (ContainsSubsequence(document.normalized[i], answer.tokens)) target[i] = true;
    }
  }
  // Only tokens that occur in the document can move the cursor.
  std::vector<std::string> question_queries;
  std::vector<std::string> document_tokens;
  for (const TokenSeq &sentence : document.normalized) {
    document_tokens.insert(document_tokens.end(), sentence.begin(), sentence.end());
  }
  std::sort(document_tokens.begin(), document_tokens.end());
  document_tokens.erase(std::unique(document_tokens.begin(), document_tokens.end()),
                        document_tokens.end());
  const auto in_document = [&](const std::string &token) {
    return std::binary_search(document_tokens.begin(), document_tokens.end(), token);
  };
  for (const std::string &token : game.normalized_question) {
    if (in_document(token)) question_queries.push_back(token);
  }
  std::sort(question_queries.begin(), question_queries.end());
  question_queries.erase(std::unique(question_queries.begin(), question_queries.end()),
                         question_queries.end());

  const auto queries_at = [&](size_t sentence) {
    switch (config.query_type) {
      case QueryType::kQuestion:
        return question_queries;
      case QueryType::kQuestionPlusObservation: {
        std::vector<std::string> queries = question_queries;
        const TokenSeq &tokens = document.normalized[sentence];
        queries.insert(queries.end(), tokens.begin(), tokens.end());
        std::sort(queries.begin(), queries.end());
        queries.erase(std::unique(queries.begin(), queries.end()), queries.end());
        return queries;
      }
      case QueryType::kVocabulary: {
        std::vector<std::string> queries;
        for (const std::string &token : document_tokens) {
          if (vocabulary != nullptr && vocabulary->Contains(token)) queries.push_back(token);
        }
        return queries;
      }
    }
    return std::vector<std::string>{};
  };

  constexpr size_t kUnvisited = static_cast<size_t>(-1);
  std::vector<size_t> parent(n, kUnvisited);
  std::vector<Action> via(n);
  std::vector<size_t> frontier = {0};
  parent[0] = 0;
  std::optional<size_t> found;
  if (target[0]) found = 0;
  for (size_t head = 0; head < frontier.size() && !found; ++head) {
    const size_t from = frontier[head];
    std::vector<std::pair<size_t, Action>> edges;
    if (config.mode == Mode::kEasy) {
      edges.emplace_back(from == 0 ? n - 1 : from - 1, Action::Previous());
      edges.emplace_back(from + 1 == n ? 0 : from + 1, Action::Next());
    }
    for (const std::string &query : queries_at(from)) {
      if (std::optional<size_t> to = CtrlfTarget(document, from, query)) {
        edges.emplace_back(*to, Action::Ctrlf(query));
      }
    }
    for (auto &[to, action] : edges) {
      if (parent[to] != kUnvisited) continue;
      parent[to] = from;
      via[to] = std::move(action);
      frontier.push_back(to);
      if (target[to]) {
        found = to;
        break;
      }
    }
  }
  if (!found) return std::nullopt;
  std::vector<Action> plan;
  for (size_t at = *found; at != 0; at = parent[at]) plan.push_back(via[at]);
  std::reverse(plan.begin(), plan.end());
  return plan;
}

std::string GoldExtract(std::span<const std::string> observation_tokens,
                        std::span<const std::string> truths) {
  if (truths.empty() || observation_tokens.empty()) return "";
  const TokenSeq normalized = NormalizeTokens(observation_tokens);
  for (const std::string &truth : truths) {
    const TokenSeq needle = NormalizeTokens(Tokenize(truth));
    if (needle.empty()) continue;
    auto it = std::search(normalized.begin(), normalized.end(), needle.begin(), needle.end());
    if (it != normalized.end()) {
      const size_t head = static_cast<size_t>(it - normalized.begin());
      return JoinTokens(observation_tokens.subspan(head, needle.size()));
    }
  }

  std::vector<TruthBag> bags;
  for (const std::string &truth : truths) {
    TruthBag bag;
    for (std::string &word : NormalizeAnswer(truth)) {
      ++bag.counts[std::move(word)];
      ++bag.length;
    }
    bags.push_back(std::move(bag));
  }
  std::vector<TokenSeq> words;
  words.reserve(observation_tokens.size());
  for (const std::string &token : observation_tokens) {
    words.push_back(NormalizeAnswer(token));
  }
  double best = -1.0;
  size_t best_head = 0;
  size_t best_tail = 0;
  const size_t length = observation_tokens.size();
  std::vector<size_t> overlap(bags.size());
  for (size_t head = 0; head < length; ++head) {
    std::unordered_map<std::string_view, int> predicted;
    size_t predicted_length = 0;
    std::fill(overlap.begin(), overlap.end(), 0);
    for (size_t tail = head; tail < length; ++tail) {
      for (const std::string &word : words[tail]) {
        const int seen = predicted[word]++;
        ++predicted_length;
        for (size_t j = 0; j < bags.size(); ++j) {
          auto it = bags[j].counts.find(word);
          if (it != bags[j].counts.end() && seen < it->second) ++overlap[j];
        }
      }
      double score = 0.0;
      for (size_t j = 0; j < bags.size(); ++j) {
        score = std::max(score, F1FromCounts(overlap[j], predicted_length, bags[j].length));
      }
      if (score > best + 1e-12) {
        best = score;
        best_head = head;
        best_tail = tail;
      }
    }
  }
  return JoinTokens(observation_tokens.subspan(best_head, best_tail - best_head + 1));
}

std::span<const std::string_view> AgentNames() { return kAgentNames; }

AgentFactory MakeAgentFactory(std::string_view name,
                              std::shared_ptr<const Vocabulary> vocabulary) {
  if (name == "random") {
    return [](uint64_t seed) { return MakeRandomAgent(seed); };
  }
  if (name == "cycling_reader") {
    return [](uint64_t) { return MakeCyclingReader(); };
  }
  if (name == "question_searcher") {
    if (!vocabulary) {
      throw Error(ErrorCode::kInvalidArgument, "question_searcher needs a vocabulary");
    }
    return [vocabulary](uint64_t) { return MakeQuestionSearcher(vocabulary); };
  }
  if (name == "oracle_navigator") {
    return [](uint64_t) { return MakeOracleNavigator(); };
  }
  std::string available;
  for (std::string_view known : kAgentNames) {
    if (!available.empty()) available += ", ";
    available += known;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown agent '" + std::string(name) + "'; available: " + available);
}

uint64_t EpisodeSeed(uint64_t base_seed, size_t index) {
  return SplitMix64(base_seed ^ SplitMix64(static_cast<uint64_t>(index)));
}

EpisodeResult RunEpisode(Agent &agent, GamePtr game, const EnvConfig &config,
                         uint64_t seed, std::shared_ptr<const Vocabulary> vocabulary) {
  if (agent.Declines(*game)) {
    EpisodeResult result;
    result.game_id = game->game_id;
    result.seed = seed;
    result.config = config;
    result.declined = true;
    return result;
  }
  auto [state, observation] = Reset(std::move(game), config, seed, std::move(vocabulary));
  agent.Begin(state, observation);
  while (!state.done()) {
    StepOutcome outcome = Step(state, agent.Act(state, observation));
    observation = std::move(outcome.observation);
  }
  return Finalize(state, agent.Predict(state, observation));
}

Evaluation Evaluate(const AgentFactory &factory, std::span<const GamePtr> games,
                    const EnvConfig &config, uint64_t base_seed,
                    std::shared_ptr<const Vocabulary> vocabulary, size_t threads) {
  if (games.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "evaluation needs at least one game");
  }
  Evaluation evaluation;
  evaluation.episodes.resize(games.size());
  std::vector<std::exception_ptr> errors(games.size());
  std::atomic<size_t> next{0};
  const auto work = [&] {
    for (size_t i = next++; i < games.size(); i = next++) {
      try {
        const uint64_t seed = EpisodeSeed(base_seed, i);
        std::unique_ptr<Agent> agent = factory(seed);
        evaluation.episodes[i] = RunEpisode(*agent, games[i], config, seed, vocabulary);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max<size_t>(1, std::min(threads, games.size()));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> workers;
    for (size_t t = 0; t < threads; ++t) workers.emplace_back(work);
    for (std::thread &worker : workers) worker.join();
  }
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error &e) {
      throw Error(e.code(), "game " + games[i]->game_id + ": " + e.what());
    }
  }
  std::vector<ScoredEpisode> scored;
  scored.reserve(evaluation.episodes.size());
  for (const EpisodeResult &episode : evaluation.episodes) scored.push_back(episode.Scored());
  evaluation.report = Aggregate(scored);
  return evaluation;
}

}  // namespace imrc
