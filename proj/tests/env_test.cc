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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "imrc/status.h"
#include "support/oracles.h"
#include "support/test_games.h"

namespace imrc {
namespace {

GamePtr ThreeSentences() {
  return MakeGame("three", "", "Alpha one here. Beta two there. Gamma three gold.",
                  "Which gamma is gold?", {{"three gold", 38}});
}

EnvConfig Config(Mode mode, QueryType type = QueryType::kQuestion, size_t memory = 1) {
  EnvConfig config;
  config.mode = mode;
  config.query_type = type;
  config.memory_slots = memory;
  return config;
}

ErrorCode StepError(EnvState &state, const Action &action) {
  try {
    Step(state, action);
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "step accepted " << action.ToString();
  return ErrorCode::kIoError;
}

TEST(Names, RoundTrip) {
  for (Mode mode : kAllModes) EXPECT_EQ(ParseMode(ModeName(mode)), mode);
  for (QueryType type : kAllQueryTypes) EXPECT_EQ(ParseQueryType(QueryTypeName(type)), type);
  for (ActionKind kind : kAllActionKinds) EXPECT_EQ(ParseActionKind(ActionKindName(kind)), kind);
  EXPECT_FALSE(ParseMode("medium").has_value());
  EXPECT_EQ(Action::Ctrlf("2011").ToString(), "ctrlf 2011");
}

TEST(EnvConfig, Validate) {
  EnvConfig config;
  EXPECT_NO_THROW(config.Validate());
  config.memory_slots = 0;
  EXPECT_THROW(config.Validate(), Error);
  config = EnvConfig{};
  config.max_steps = 0;
  EXPECT_THROW(config.Validate(), Error);
}

TEST(Reset, EasyAndHardMasks) {
  auto [easy_state, easy] = Reset(ThreeSentences(), Config(Mode::kEasy), 1);
  EXPECT_EQ(JoinTokens(easy.observation_tokens), "Alpha one here .");
  EXPECT_EQ(easy.legal_actions, (std::vector<ActionKind>{ActionKind::kPrevious, ActionKind::kNext,
                                                        ActionKind::kCtrlf, ActionKind::kStop}));
  EXPECT_EQ(easy_state.cursor(), 0u);
  EXPECT_EQ(easy_state.step_count(), 0u);
  auto [hard_state, hard] = Reset(ThreeSentences(), Config(Mode::kHard), 1);
  EXPECT_EQ(hard.legal_actions, (std::vector<ActionKind>{ActionKind::kCtrlf, ActionKind::kStop}));
}

TEST(Reset, HarvardFirstObservation) {
  auto [state, observation] = Reset(testing::HarvardGame(), Config(Mode::kEasy), 0);
  EXPECT_EQ(observation.Text(), "Harvard has the largest university endowment in the world .");
}

TEST(Reset, EmptyGameRejected) {
  const GamePtr empty =
      MakeGameFromDocument("empty", "", Document::FromSentences({}), "Q?", {});
  EXPECT_THROW(Reset(empty, Config(Mode::kEasy), 0), Error);
  EXPECT_THROW(Reset(ThreeSentences(), Config(Mode::kEasy, QueryType::kVocabulary), 0), Error);
}

TEST(Step, PreviousWrapsToLast) {
  auto [state, observation] = Reset(ThreeSentences(), Config(Mode::kEasy), 0);
  Step(state, Action::Previous());
  EXPECT_EQ(state.cursor(), 2u);
  Step(state, Action::Next());
  EXPECT_EQ(state.cursor(), 0u);
}

TEST(Step, HarvardWorkedTrajectory) {
  auto [state, observation] = Reset(testing::HarvardGame(), Config(Mode::kEasy), 0);
  StepOutcome out = Step(state, Action::Next());
  EXPECT_EQ(state.cursor(), 1u);
  out = Step(state, Action::Ctrlf("harvard"));
  EXPECT_EQ(state.cursor(), 2u);
  EXPECT_EQ(out.info.query_found, std::optional<bool>(true));
  EXPECT_EQ(out.observation.Text().rfind("In December 2008 , Harvard announced", 0), 0u);
  out = Step(state, Action::Ctrlf("2011"));
  EXPECT_EQ(out.observation.Text().rfind("As of September 2011", 0), 0u);
  out = Step(state, Action::Ctrlf("2011"));
  EXPECT_EQ(out.observation.Text().rfind("It was worth $ 32 billion in 2011", 0), 0u);
  EXPECT_EQ(out.reward, 0.0);
  EXPECT_FALSE(out.done);
  out = Step(state, Action::Stop());
  EXPECT_TRUE(out.done);
  EXPECT_DOUBLE_EQ(out.reward, 1.0);
  EXPECT_EQ(out.info.sufficient_info, std::optional<bool>(true));
  EXPECT_EQ(state.step_count(), 4u);
  const EpisodeResult result = Finalize(state, std::string("$ 32 billion"));
  EXPECT_DOUBLE_EQ(result.f1, 1.0);
  EXPECT_EQ(result.trajectory.size(), 5u);
}

TEST(Step, CaseInsensitiveQuery) {
  auto [state, observation] = Reset(testing::HarvardGame(), Config(Mode::kEasy), 0);
  Step(state, Action::Ctrlf("Harvard"));
  EXPECT_EQ(state.cursor(), 2u);
}

TEST(Step, CtrlfMissConsumesStep) {
  EnvConfig config = Config(Mode::kEasy, QueryType::kQuestion);
  auto [state, observation] = Reset(ThreeSentences(), config, 0);
  const StepOutcome out = Step(state, Action::Ctrlf("which"));
  EXPECT_EQ(out.info.query_found, std::optional<bool>(false));
  EXPECT_EQ(state.cursor(), 0u);
  EXPECT_EQ(state.step_count(), 1u);
}

TEST(Step, CtrlfOnlyInCurrentSentenceReturnsCurrent) {
  auto [state, observation] = Reset(ThreeSentences(), Config(Mode::kEasy, QueryType::kQuestionPlusObservation), 0);
  const StepOutcome out = Step(state, Action::Ctrlf("alpha"));
  EXPECT_EQ(out.info.query_found, std::optional<bool>(true));
  EXPECT_EQ(state.cursor(), 0u);
}

TEST(Step, MaskViolationsLeaveStateUntouched) {
  auto [state, observation] = Reset(ThreeSentences(), Config(Mode::kHard), 0);
  EXPECT_EQ(StepError(state, Action::Next()), ErrorCode::kMaskViolation);
  EXPECT_EQ(StepError(state, Action::Previous()), ErrorCode::kMaskViolation);
  EXPECT_EQ(StepError(state, Action::Ctrlf("alpha")), ErrorCode::kMaskViolation);
  EXPECT_EQ(StepError(state, Action::Ctrlf("gamma gold")), ErrorCode::kMaskViolation);
  EXPECT_EQ(state.step_count(), 0u);
  EXPECT_TRUE(state.history().empty());
  Step(state, Action::Ctrlf("gamma"));
  EXPECT_EQ(state.cursor(), 2u);
}

TEST(Step, LifecycleAfterDone) {
  auto [state, observation] = Reset(ThreeSentences(), Config(Mode::kEasy), 0);
  EXPECT_THROW(Finalize(state, std::string("x")), Error);
  Step(state, Action::Stop());
  EXPECT_EQ(StepError(state, Action::Next()), ErrorCode::kLifecycle);
  EXPECT_EQ(state.step_count(), 0u);  // stop is free
}

TEST(Step, BudgetForcesStopAtExactlyMaxSteps) {
  auto [state, observation] = Reset(ThreeSentences(), Config(Mode::kEasy), 0);
  for (size_t i = 1; i <= kDefaultMaxSteps; ++i) {
    ASSERT_FALSE(state.done());
    const StepOutcome out = Step(state, Action::Next());
    EXPECT_EQ(state.step_count(), i);
    EXPECT_EQ(out.done, i == kDefaultMaxSteps);
    EXPECT_EQ(out.info.forced_stop, i == kDefaultMaxSteps);
  }
  EXPECT_TRUE(state.forced_stop());
  // Twenty nexts over three sentences end on sentence 20 mod 3 = 2, the answer.
  EXPECT_DOUBLE_EQ(state.terminal_reward(), 1.0);
}

TEST(Step, RewardValueScales) {
  EnvConfig config = Config(Mode::kEasy);
  config.reward_value = 2.5;
  auto [state, observation] = Reset(ThreeSentences(), config, 0);
  Step(state, Action::Previous());
  EXPECT_DOUBLE_EQ(Step(state, Action::Stop()).reward, 2.5);
  auto [miss, unused] = Reset(ThreeSentences(), config, 0);
  EXPECT_DOUBLE_EQ(Step(miss, Action::Stop()).reward, 0.0);
}

TEST(Memory, FifoWithDedup) {
  auto [state, observation] = Reset(ThreeSentences(), Config(Mode::kEasy, QueryType::kQuestion, 3), 0);
  Step(state, Action::Next());
  Step(state, Action::Previous());
  EXPECT_EQ(state.memory(), (std::deque<size_t>{1, 0}));
  Step(state, Action::Previous());
  Step(state, Action::Previous());
  EXPECT_EQ(state.memory(), (std::deque<size_t>{0, 2, 1}));
  EXPECT_EQ(Observe(state).Text(), "Alpha one here . Gamma three gold . Beta two there .");
}

TEST(Memory, WithoutDedupRepeatsAndEvicts) {
  EnvConfig config = Config(Mode::kEasy, QueryType::kQuestion, 3);
  config.memory_dedup = false;
  auto [state, observation] = Reset(ThreeSentences(), config, 0);
  Step(state, Action::Next());
  Step(state, Action::Previous());
  EXPECT_EQ(state.memory(), (std::deque<size_t>{0, 1, 0}));
  Step(state, Action::Next());
  EXPECT_EQ(state.memory(), (std::deque<size_t>{1, 0, 1}));
}

TEST(LegalQueries, QuestionTokensAreUniqueNormalized) {
  auto [state, observation] = Reset(testing::HarvardGame(), Config(Mode::kEasy), 0);
  EXPECT_EQ(observation.legal_queries.tokens(),
            (std::vector<std::string>{"2011", "?", "endowment", "harvard", "in", "the", "total",
                                      "was", "what"}));
}

TEST(LegalQueries, QuestionPlusObservationTracksCursor) {
  auto [state, observation] =
      Reset(ThreeSentences(), Config(Mode::kEasy, QueryType::kQuestionPlusObservation), 0);
  EXPECT_TRUE(observation.legal_queries.Contains("alpha"));
  EXPECT_TRUE(observation.legal_queries.Contains("which"));
  EXPECT_FALSE(observation.legal_queries.Contains("beta"));
  const StepOutcome out = Step(state, Action::Next());
  EXPECT_TRUE(out.observation.legal_queries.Contains("beta"));
  EXPECT_FALSE(out.observation.legal_queries.Contains("alpha"));
}

TEST(LegalQueries, VocabularyIsShared) {
  const GamePtr game = ThreeSentences();
  auto vocab = testing::VocabularyOf({game}, 4);
  auto [state, observation] =
      Reset(game, Config(Mode::kHard, QueryType::kVocabulary), 0, vocab);
  EXPECT_TRUE(observation.legal_queries.is_vocabulary());
  EXPECT_EQ(observation.legal_queries.size(), 4u);
  EXPECT_LE(observation.legal_queries.size(), kDefaultVocabularyCap);
}

TEST(SufficientInfo, HarvardMemory) {
  auto [state, observation] = Reset(testing::HarvardGame(), Config(Mode::kEasy), 0);
  EXPECT_FALSE(SufficientInfo(state));
  Step(state, Action::Previous());
  EXPECT_TRUE(SufficientInfo(state));
}

TEST(SufficientInfo, AnswerAcrossJunction) {
  const GamePtr game = MakeGameFromDocument(
      "j", "", Document::FromSentences({"red green", "blue yellow"}), "q?",
      {{"green blue", -1, {"green", "blue"}, std::nullopt}});
  auto [state, observation] = Reset(game, Config(Mode::kEasy, QueryType::kQuestion, 2), 0);
  EXPECT_FALSE(SufficientInfo(state));
  Step(state, Action::Next());  // memory [0, 1] → "red green blue yellow"
  EXPECT_TRUE(SufficientInfo(state));
  Step(state, Action::Previous());  // memory [1, 0] → "blue yellow red green"
  EXPECT_FALSE(SufficientInfo(state));
}

TEST(Finalize, SpanPrediction) {
  auto [state, observation] = Reset(testing::HarvardGame(), Config(Mode::kEasy), 0);
  Step(state, Action::Previous());
  Step(state, Action::Stop());
  // "It was worth $ 32 billion ..." → tokens 2..5.
  const EpisodeResult result = Finalize(state, TokenSpan{2, 5});
  EXPECT_EQ(result.prediction, "worth $ 32 billion");
  EXPECT_DOUBLE_EQ(result.f1, 0.8);
  EXPECT_TRUE(result.sufficient_info);
  EXPECT_THROW(Finalize(state, TokenSpan{5, 2}), Error);
  EXPECT_THROW(Finalize(state, TokenSpan{0, 10000}), Error);
}

TEST(Properties, CtrlfMatchesBruteForce) {
  std::mt19937_64 rng(17);
  testing::RandomGameOptions options;
  options.min_sentences = options.max_sentences = 10;
  for (int trial = 0; trial < 1000; ++trial) {
    const GamePtr game = testing::RandomGame(rng, options, "g");
    const size_t cursor = rng() % game->sentence_count();
    const std::string query = "w" + std::to_string(rng() % (options.word_pool + 2));
    EXPECT_EQ(CtrlfTarget(*game->document, cursor, query),
              testing::BruteForceCtrlf(game->document->normalized, cursor, query));
  }
}

TEST(Properties, WrapClosureAndMemoryBound) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 300; ++trial) {
    const GamePtr game = testing::RandomGame(rng, {}, "g");
    const size_t n = game->sentence_count();
    for (size_t memory : kStandardMemorySizes) {
      EnvConfig config = Config(Mode::kEasy, QueryType::kQuestion, memory);
      config.max_steps = 2 * n + 1;
      auto [state, observation] = Reset(game, config, 0);
      for (size_t i = 0; i < n; ++i) Step(state, Action::Next());
      EXPECT_EQ(state.cursor(), 0u);
      for (size_t i = 0; i < n; ++i) Step(state, Action::Previous());
      EXPECT_EQ(state.cursor(), 0u);
      EXPECT_LE(state.memory().size(), memory);
      EXPECT_EQ(state.memory().back(), state.cursor());
    }
  }
}

TEST(Properties, DeterministicOutcomes) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const GamePtr game = testing::RandomGame(rng, {}, "g");
    auto [a, oa] = Reset(game, Config(Mode::kEasy, QueryType::kQuestionPlusObservation, 3), 9);
    auto [b, ob] = Reset(game, Config(Mode::kEasy, QueryType::kQuestionPlusObservation, 3), 9);
    EXPECT_EQ(ObservationDigest(oa), ObservationDigest(ob));
    while (!a.done()) {
      const Observation current = Observe(a);
      Action action;
      const ActionKind kind = current.legal_actions[rng() % current.legal_actions.size()];
      if (kind == ActionKind::kCtrlf) {
        const auto &tokens = current.legal_queries.tokens();
        action = Action::Ctrlf(tokens[rng() % tokens.size()]);
      } else {
        action.kind = kind;
      }
      const StepOutcome x = Step(a, action);
      const StepOutcome y = Step(b, action);
      EXPECT_EQ(ObservationDigest(x.observation), ObservationDigest(y.observation));
      EXPECT_EQ(x.reward, y.reward);
      EXPECT_EQ(x.info, y.info);
    }
  }
}

}  // namespace
}  // namespace imrc
