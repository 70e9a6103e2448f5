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

#include "imrc/env.h"

#include <algorithm>
#include <set>

#include "imrc/digest.h"
#include "imrc/status.h"
#include "json.hpp"

namespace imrc {
namespace {

[[noreturn]] void MaskViolation(const std::string &message) {
  throw Error(ErrorCode::kMaskViolation, message);
}

bool Contains(const TokenSeq &tokens, std::string_view token) {
  return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

bool IsLegalQuery(const EnvState &state, std::string_view normalized) {
  const GameSpec &game = state.game();
  switch (state.config().query_type) {
    case QueryType::kQuestion:
      return Contains(game.normalized_question, normalized);
    case QueryType::kQuestionPlusObservation:
      if (Contains(game.normalized_question, normalized)) return true;
      for (size_t sentence : state.memory()) {
        if (Contains(game.document->normalized[sentence], normalized)) return true;
      }
      return false;
    case QueryType::kVocabulary:
      return state.vocabulary()->Contains(normalized);
  }
  return false;
}

}  // namespace

std::string_view ModeName(Mode mode) {
  return mode == Mode::kEasy ? "easy" : "hard";
}

std::string_view QueryTypeName(QueryType type) {
  switch (type) {
    case QueryType::kQuestion: return "question";
    case QueryType::kQuestionPlusObservation: return "question+memory";
    case QueryType::kVocabulary: return "vocab";
  }
  return "";
}

std::string_view ActionKindName(ActionKind kind) {
  switch (kind) {
    case ActionKind::kPrevious: return "previous";
    case ActionKind::kNext: return "next";
    case ActionKind::kCtrlf: return "ctrlf";
    case ActionKind::kStop: return "stop";
  }
  return "";
}

std::optional<Mode> ParseMode(std::string_view name) {
  for (Mode mode : kAllModes) {
    if (ModeName(mode) == name) return mode;
  }
  return std::nullopt;
}

std::optional<QueryType> ParseQueryType(std::string_view name) {
  for (QueryType type : kAllQueryTypes) {
    if (QueryTypeName(type) == name) return type;
  }
  return std::nullopt;
}

std::optional<ActionKind> ParseActionKind(std::string_view name) {
  for (ActionKind kind : kAllActionKinds) {
    if (ActionKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

void EnvConfig::Validate() const {
  if (memory_slots < 1) {
    throw Error(ErrorCode::kInvalidArgument, "memory_slots must be >= 1");
  }
  if (max_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_steps must be >= 1");
  }
  if (!(discount_gamma >= 0.0 && discount_gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "discount_gamma must be in [0, 1]");
  }
}

std::string Action::ToString() const {
  std::string out(ActionKindName(kind));
  if (kind == ActionKind::kCtrlf) out += " " + query;
  return out;
}

QuerySet QuerySet::Explicit(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  QuerySet set;
  set.tokens_ = std::move(tokens);
  return set;
}

QuerySet QuerySet::FromVocabulary(std::shared_ptr<const Vocabulary> vocab) {
  QuerySet set;
  set.vocabulary_ = std::move(vocab);
  return set;
}

bool QuerySet::Contains(std::string_view normalized_token) const {
  if (vocabulary_) return vocabulary_->Contains(normalized_token);
  return std::binary_search(tokens_.begin(), tokens_.end(), normalized_token);
}

size_t QuerySet::size() const {
  return vocabulary_ ? vocabulary_->size() : tokens_.size();
}

const std::vector<std::string> &QuerySet::tokens() const {
  return vocabulary_ ? vocabulary_->tokens() : tokens_;
}

bool Observation::IsLegal(ActionKind kind) const {
  return std::find(legal_actions.begin(), legal_actions.end(), kind) !=
         legal_actions.end();
}

std::string ObservationDigest(const Observation &observation) {
  nlohmann::json record{{"question", observation.question_tokens},
                        {"observation", observation.observation_tokens},
                        {"step", observation.step_index},
                        {"done", observation.done}};
  nlohmann::json actions = nlohmann::json::array();
  for (ActionKind kind : observation.legal_actions) {
    actions.push_back(ActionKindName(kind));
  }
  record["legal_actions"] = std::move(actions);
  if (observation.legal_queries.is_vocabulary()) {
    record["legal_queries"] = {
        {"vocab_hash", observation.legal_queries.vocabulary()->Hash()}};
  } else {
    record["legal_queries"] = observation.legal_queries.tokens();
  }
  return Sha256Hex(record.dump());
}

void EnvState::Remember(size_t sentence) {
  if (config_.memory_dedup) {
    auto it = std::find(memory_.begin(), memory_.end(), sentence);
    if (it != memory_.end()) memory_.erase(it);
  }
  memory_.push_back(sentence);
  while (memory_.size() > config_.memory_slots) memory_.pop_front();
}

std::pair<EnvState, Observation> Reset(GamePtr game, const EnvConfig &config,
                                       uint64_t seed,
                                       std::shared_ptr<const Vocabulary> vocabulary) {
  config.Validate();
  if (!game || !game->document || game->document->sentences.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot reset on a game without sentences");
  }
  if (config.query_type == QueryType::kVocabulary && !vocabulary) {
    throw Error(ErrorCode::kInvalidArgument,
                "the vocab query type needs a corpus vocabulary");
  }
  EnvState state;
  state.game_ = std::move(game);
  state.config_ = config;
  state.vocabulary_ = std::move(vocabulary);
  state.seed_ = seed;
  state.memory_.push_back(0);
  Observation observation = Observe(state);
  state.initial_digest_ = ObservationDigest(observation);
  return {std::move(state), std::move(observation)};
}

StepOutcome Step(EnvState &state, const Action &action) {
  if (state.done_) {
    throw Error(ErrorCode::kLifecycle, "episode already terminated");
  }
  const std::vector<ActionKind> legal = LegalActions(state);
  if (std::find(legal.begin(), legal.end(), action.kind) == legal.end()) {
    MaskViolation("action '" + std::string(ActionKindName(action.kind)) +
                  "' is masked in " + std::string(ModeName(state.config_.mode)) +
                  " mode");
  }
  const size_t n = state.game_->sentence_count();
  StepInfo info;
  switch (action.kind) {
    case ActionKind::kPrevious:
      state.cursor_ = state.cursor_ == 0 ? n - 1 : state.cursor_ - 1;
      break;
    case ActionKind::kNext:
      state.cursor_ = state.cursor_ + 1 == n ? 0 : state.cursor_ + 1;
      break;
    case ActionKind::kCtrlf: {
      const std::string normalized = NormalizeToken(action.query);
      if (normalized.empty() || !IsLegalQuery(state, normalized)) {
        MaskViolation("query '" + action.query + "' is not a legal " +
                      std::string(QueryTypeName(state.config_.query_type)) +
                      " token");
      }
      std::optional<size_t> target =
          CtrlfTarget(*state.game_->document, state.cursor_, normalized);
      info.query_found = target.has_value();
      if (target.has_value()) state.cursor_ = *target;
      break;
    }
    case ActionKind::kStop:
      state.done_ = true;
      break;
  }
  if (action.kind != ActionKind::kStop) {
    state.Remember(state.cursor_);
    ++state.step_count_;
    if (state.step_count_ >= state.config_.max_steps) {
      state.done_ = true;
      state.forced_stop_ = true;
      info.forced_stop = true;
    }
  }
  double reward = 0.0;
  if (state.done_) {
    const bool sufficient = SufficientInfo(state);
    info.sufficient_info = sufficient;
    reward = sufficient ? state.config_.reward_value : 0.0;
    state.terminal_reward_ = reward;
  }
  StepOutcome outcome{Observe(state), reward, state.done_, info};
  state.history_.push_back(
      {action, ObservationDigest(outcome.observation), reward, info});
  return outcome;
}

std::optional<size_t> CtrlfTarget(const Document &document, size_t cursor,
                                  std::string_view normalized_query) {
  const size_t n = document.normalized.size();
  for (size_t offset = 1; offset <= n; ++offset) {
    const size_t index = (cursor + offset) % n;
    if (Contains(document.normalized[index], normalized_query)) return index;
  }
  return std::nullopt;
}

std::optional<size_t> CtrlfTarget(const EnvState &state, std::string_view query) {
  return CtrlfTarget(*state.game().document, state.cursor(), NormalizeToken(query));
}

std::vector<ActionKind> LegalActions(const EnvState &state) {
  if (state.done()) return {};
  if (state.config().mode == Mode::kHard) {
    return {ActionKind::kCtrlf, ActionKind::kStop};
  }
  return {kAllActionKinds.begin(), kAllActionKinds.end()};
}

QuerySet LegalQueryTokens(const EnvState &state) {
  if (state.done()) return {};
  const GameSpec &game = state.game();
  switch (state.config().query_type) {
    case QueryType::kQuestion:
      return QuerySet::Explicit(game.normalized_question);
    case QueryType::kQuestionPlusObservation: {
      std::vector<std::string> tokens = game.normalized_question;
      for (size_t sentence : state.memory()) {
        const TokenSeq &normalized = game.document->normalized[sentence];
        tokens.insert(tokens.end(), normalized.begin(), normalized.end());
      }
      return QuerySet::Explicit(std::move(tokens));
    }
    case QueryType::kVocabulary:
      return QuerySet::FromVocabulary(state.vocabulary());
  }
  return {};
}

TokenSeq ObservationTokens(const EnvState &state) {
  TokenSeq tokens;
  for (size_t sentence : state.memory()) {
    const TokenSeq &display = state.game().document->sentences[sentence];
    tokens.insert(tokens.end(), display.begin(), display.end());
  }
  return tokens;
}

TokenSeq NormalizedObservationTokens(const EnvState &state) {
  TokenSeq tokens;
  for (size_t sentence : state.memory()) {
    const TokenSeq &normalized = state.game().document->normalized[sentence];
    tokens.insert(tokens.end(), normalized.begin(), normalized.end());
  }
  return tokens;
}

Observation Observe(const EnvState &state) {
  Observation observation;
  observation.question_tokens = state.game().question_tokens;
  observation.observation_tokens = ObservationTokens(state);
  observation.step_index = state.step_count();
  observation.legal_actions = LegalActions(state);
  observation.legal_queries = LegalQueryTokens(state);
  observation.done = state.done();
  return observation;
}

bool SufficientInfo(const EnvState &state) {
  const TokenSeq observed = NormalizedObservationTokens(state);
  for (const Answer &answer : state.game().answers) {
    if (ContainsSubsequence(observed, answer.tokens)) return true;
  }
  return false;
}

EpisodeResult Finalize(const EnvState &state, const Prediction &prediction) {
  if (!state.done()) {
    throw Error(ErrorCode::kLifecycle, "finalize called before the episode ended");
  }
  EpisodeResult result;
  result.game_id = state.game().game_id;
  result.seed = state.seed();
  result.config = state.config();
  result.initial_digest = state.initial_digest();
  result.final_observation = ObservationTokens(state);
  if (const auto *span = std::get_if<TokenSpan>(&prediction)) {
    if (span->head > span->tail || span->tail >= result.final_observation.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "prediction span [" + std::to_string(span->head) + ", " +
                      std::to_string(span->tail) + "] is outside the " +
                      std::to_string(result.final_observation.size()) +
                      "-token observation");
    }
    result.prediction = JoinTokens(std::span<const std::string>(
        result.final_observation.data() + span->head, span->tail - span->head + 1));
  } else {
    result.prediction = std::get<std::string>(prediction);
  }
  std::vector<std::string> truths;
  for (const Answer &answer : state.game().answers) truths.push_back(answer.text);
  result.f1 = truths.empty() ? 0.0 : MaxF1(result.prediction, truths);
  result.reward = state.terminal_reward();
  result.sufficient_info = SufficientInfo(state);
  result.forced_stop = state.forced_stop();
  result.steps = state.step_count();
  result.trajectory = state.history();
  return result;
}

}  // namespace imrc
