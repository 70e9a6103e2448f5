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

#ifndef IMRC_ENV_H_
#define IMRC_ENV_H_

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "imrc/corpus.h"
#include "imrc/scoring.h"
#include "imrc/text.h"

namespace imrc {

enum class Mode { kEasy, kHard };

enum class QueryType { kQuestion, kQuestionPlusObservation, kVocabulary };

enum class ActionKind { kPrevious, kNext, kCtrlf, kStop };

inline constexpr std::array<Mode, 2> kAllModes = {Mode::kEasy, Mode::kHard};
inline constexpr std::array<QueryType, 3> kAllQueryTypes = {
    QueryType::kQuestion, QueryType::kQuestionPlusObservation,
    QueryType::kVocabulary};
inline constexpr std::array<ActionKind, 4> kAllActionKinds = {
    ActionKind::kPrevious, ActionKind::kNext, ActionKind::kCtrlf,
    ActionKind::kStop};
// Memory queue sizes studied for the baseline agent.
inline constexpr std::array<size_t, 3> kStandardMemorySizes = {1, 3, 5};
inline constexpr size_t kDefaultMaxSteps = 20;

std::string_view ModeName(Mode mode);
std::string_view QueryTypeName(QueryType type);
std::string_view ActionKindName(ActionKind kind);
std::optional<Mode> ParseMode(std::string_view name);
std::optional<QueryType> ParseQueryType(std::string_view name);
std::optional<ActionKind> ParseActionKind(std::string_view name);

struct EnvConfig {
  Mode mode = Mode::kEasy;
  QueryType query_type = QueryType::kQuestion;
  size_t memory_slots = 1;
  size_t max_steps = kDefaultMaxSteps;
  double reward_value = 1.0;
  // Carried for trainers; the engine never discounts.
  double discount_gamma = 0.9;
  // Re-observing a remembered sentence moves it to the newest slot instead of
  // storing it twice.
  bool memory_dedup = true;

  // Throws Error(kInvalidArgument).
  void Validate() const;
  bool operator==(const EnvConfig &) const = default;
};

struct Action {
  ActionKind kind = ActionKind::kStop;
  // Single token, set iff kind == kCtrlf.
  std::string query;

  static Action Previous() { return {ActionKind::kPrevious, {}}; }
  static Action Next() { return {ActionKind::kNext, {}}; }
  static Action Ctrlf(std::string query) {
    return {ActionKind::kCtrlf, std::move(query)};
  }
  static Action Stop() { return {ActionKind::kStop, {}}; }

  std::string ToString() const;
  bool operator==(const Action &) const = default;
};

// Legal Ctrl+F queries, in normalized form. Either an explicit sorted list or
// a view of the shared corpus vocabulary.
class QuerySet {
 public:
  QuerySet() = default;
  static QuerySet Explicit(std::vector<std::string> tokens);
  static QuerySet FromVocabulary(std::shared_ptr<const Vocabulary> vocab);

  bool Contains(std::string_view normalized_token) const;
  size_t size() const;
  bool empty() const { return size() == 0; }
  bool is_vocabulary() const { return vocabulary_ != nullptr; }
  const std::shared_ptr<const Vocabulary> &vocabulary() const {
    return vocabulary_;
  }
  // Sorted for explicit sets, rank order for the vocabulary.
  const std::vector<std::string> &tokens() const;

 private:
  std::vector<std::string> tokens_;
  std::shared_ptr<const Vocabulary> vocabulary_;
};

struct Observation {
  TokenSeq question_tokens;
  // Memory sentences, oldest to newest, concatenated.
  TokenSeq observation_tokens;
  size_t step_index = 0;
  std::vector<ActionKind> legal_actions;
  QuerySet legal_queries;
  bool done = false;

  bool IsLegal(ActionKind kind) const;
  std::string Text() const { return JoinTokens(observation_tokens); }
};

// Stable SHA-256 of everything an agent can see in `observation`.
std::string ObservationDigest(const Observation &observation);

struct StepInfo {
  // Set for ctrlf only.
  std::optional<bool> query_found;
  bool forced_stop = false;
  // Set on the terminal step only.
  std::optional<bool> sufficient_info;

  bool operator==(const StepInfo &) const = default;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct StepRecord {
  Action action;
  std::string digest;
  double reward = 0.0;
  StepInfo info;
};

// A live episode. Only Reset() and Step() create or change one; once done it
// never changes again.
class EnvState {
 public:
  const GameSpec &game() const { return *game_; }
  const GamePtr &game_ptr() const { return game_; }
  const EnvConfig &config() const { return config_; }
  const std::shared_ptr<const Vocabulary> &vocabulary() const { return vocabulary_; }
  // Zero-based sentence index.
  size_t cursor() const { return cursor_; }
  // Oldest first; back() is always the cursor.
  const std::deque<size_t> &memory() const { return memory_; }
  size_t step_count() const { return step_count_; }
  bool done() const { return done_; }
  bool forced_stop() const { return forced_stop_; }
  uint64_t seed() const { return seed_; }
  double terminal_reward() const { return terminal_reward_; }
  const std::string &initial_digest() const { return initial_digest_; }
  const std::vector<StepRecord> &history() const { return history_; }

 private:
  friend std::pair<EnvState, Observation> Reset(
      GamePtr game, const EnvConfig &config, uint64_t seed,
      std::shared_ptr<const Vocabulary> vocabulary);
  friend StepOutcome Step(EnvState &state, const Action &action);

  void Remember(size_t sentence);

  GamePtr game_;
  EnvConfig config_;
  std::shared_ptr<const Vocabulary> vocabulary_;
  size_t cursor_ = 0;
  std::deque<size_t> memory_;
  size_t step_count_ = 0;
  bool done_ = false;
  bool forced_stop_ = false;
  uint64_t seed_ = 0;
  double terminal_reward_ = 0.0;
  std::string initial_digest_;
  std::vector<StepRecord> history_;
};

// Starts an episode on the first sentence. `vocabulary` is required for
// QueryType::kVocabulary.
std::pair<EnvState, Observation> Reset(
    GamePtr game, const EnvConfig &config, uint64_t seed,
    std::shared_ptr<const Vocabulary> vocabulary = nullptr);

// Throws Error(kLifecycle) after termination and Error(kMaskViolation) for an
// action kind or query outside the advertised legal sets; the state is left
// untouched in both cases.
StepOutcome Step(EnvState &state, const Action &action);

// Forward-cyclic search starting after `cursor`, the cursor sentence last.
std::optional<size_t> CtrlfTarget(const Document &document, size_t cursor,
                                  std::string_view normalized_query);
std::optional<size_t> CtrlfTarget(const EnvState &state, std::string_view query);

std::vector<ActionKind> LegalActions(const EnvState &state);
QuerySet LegalQueryTokens(const EnvState &state);

TokenSeq ObservationTokens(const EnvState &state);
TokenSeq NormalizedObservationTokens(const EnvState &state);
Observation Observe(const EnvState &state);

// True iff some ground-truth answer occurs contiguously in the normalized
// memory concatenation.
bool SufficientInfo(const EnvState &state);

// Inclusive token span into the final observation.
struct TokenSpan {
  size_t head = 0;
  size_t tail = 0;
};

using Prediction = std::variant<TokenSpan, std::string>;

struct EpisodeResult {
  std::string game_id;
  uint64_t seed = 0;
  EnvConfig config;
  std::string initial_digest;
  std::string prediction;
  double f1 = 0.0;
  double reward = 0.0;
  bool sufficient_info = false;
  bool forced_stop = false;
  size_t steps = 0;
  bool declined = false;
  TokenSeq final_observation;
  std::vector<StepRecord> trajectory;

  ScoredEpisode Scored() const {
    return {f1, sufficient_info, steps, declined};
  }
};

// Throws Error(kLifecycle) before termination and Error(kInvalidArgument) for
// a span outside the final observation or with head > tail.
EpisodeResult Finalize(const EnvState &state, const Prediction &prediction);

}  // namespace imrc

#endif  // IMRC_ENV_H_
