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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "imrc/status.h"
#include "support/oracles.h"
#include "support/test_games.h"

namespace imrc {
namespace {

EnvConfig Config(Mode mode, QueryType type = QueryType::kQuestion, size_t memory = 1) {
  EnvConfig config;
  config.mode = mode;
  config.query_type = type;
  config.memory_slots = memory;
  return config;
}

std::vector<GamePtr> RandomGames(uint64_t seed, size_t count,
                                 const testing::RandomGameOptions &options = {}) {
  std::mt19937_64 rng(seed);
  std::vector<GamePtr> games;
  for (size_t i = 0; i < count; ++i) {
    games.push_back(testing::RandomGame(rng, options, "g" + std::to_string(i)));
  }
  return games;
}

// Runs `agent` by hand, checking every action against the advertised masks.
void ExpectOnlyLegalActions(Agent &agent, const GamePtr &game, const EnvConfig &config,
                            std::shared_ptr<const Vocabulary> vocab) {
  if (agent.Declines(*game)) return;
  auto [state, observation] = Reset(game, config, 5, vocab);
  agent.Begin(state, observation);
  while (!state.done()) {
    const Action action = agent.Act(state, observation);
    ASSERT_TRUE(observation.IsLegal(action.kind)) << agent.name() << " " << action.ToString();
    if (action.kind == ActionKind::kCtrlf) {
      ASSERT_TRUE(observation.legal_queries.Contains(action.query))
          << agent.name() << " " << action.ToString();
    }
    observation = Step(state, action).observation;
  }
}

TEST(RandomAgent, HardModeEmitsOnlyCtrlfAndStop) {
  for (const GamePtr &game : RandomGames(1, 100)) {
    auto agent = MakeRandomAgent(3);
    auto [state, observation] = Reset(game, Config(Mode::kHard), 0);
    while (!state.done()) {
      const Action action = agent->Act(state, observation);
      ASSERT_TRUE(action.kind == ActionKind::kCtrlf || action.kind == ActionKind::kStop);
      observation = Step(state, action).observation;
    }
  }
}

TEST(RandomAgent, SameSeedSameTrajectory) {
  const auto games = RandomGames(2, 50);
  const auto factory = MakeAgentFactory("random", nullptr);
  const Evaluation a = Evaluate(factory, games, Config(Mode::kEasy), 77, nullptr);
  const Evaluation b = Evaluate(factory, games, Config(Mode::kEasy), 77, nullptr, 4);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (size_t i = 0; i < a.episodes.size(); ++i) {
    ASSERT_EQ(a.episodes[i].trajectory.size(), b.episodes[i].trajectory.size());
    for (size_t s = 0; s < a.episodes[i].trajectory.size(); ++s) {
      EXPECT_EQ(a.episodes[i].trajectory[s].action, b.episodes[i].trajectory[s].action);
      EXPECT_EQ(a.episodes[i].trajectory[s].digest, b.episodes[i].trajectory[s].digest);
    }
  }
  EXPECT_EQ(a.report.mean_f1, b.report.mean_f1);
  EXPECT_EQ(a.report.mean_steps, b.report.mean_steps);
}

TEST(RandomAgent, FindsAnswersSometimes) {
  const auto games = RandomGames(3, 1000);
  const Evaluation eval =
      Evaluate(MakeAgentFactory("random", nullptr), games, Config(Mode::kEasy), 1, nullptr);
  EXPECT_GT(eval.report.sufficient_info_rate, 0.0);
  for (const EpisodeResult &episode : eval.episodes) {
    EXPECT_EQ(episode.prediction, JoinTokens(episode.final_observation));
  }
}

TEST(CyclingReader, StopsImmediatelyWhenAnswerIsFirst) {
  auto game = MakeGame("first", "", "Gold here. Nothing there.", "Where?", {{"Gold", 0}});
  auto agent = MakeCyclingReader();
  const EpisodeResult result = RunEpisode(*agent, game, Config(Mode::kEasy), 0, nullptr);
  EXPECT_EQ(result.steps, 0u);
  EXPECT_DOUBLE_EQ(result.reward, 1.0);
  EXPECT_DOUBLE_EQ(result.f1, 1.0);
}

TEST(CyclingReader, ReadsUntilAnswerSentence) {
  auto agent = MakeCyclingReader();
  const EpisodeResult result =
      RunEpisode(*agent, testing::HarvardGame(), Config(Mode::kEasy), 0, nullptr);
  EXPECT_EQ(result.steps, 4u);
  EXPECT_DOUBLE_EQ(result.reward, 1.0);
  EXPECT_EQ(result.prediction, "$ 32 billion");
}

TEST(CyclingReader, SufficientOnEveryAlignedGame) {
  testing::RandomGameOptions options;
  options.max_sentences = 21;
  const auto games = RandomGames(4, 500, options);
  const Evaluation eval = Evaluate(MakeAgentFactory("cycling_reader", nullptr), games,
                                   Config(Mode::kEasy), 0, nullptr);
  EXPECT_DOUBLE_EQ(eval.report.sufficient_info_rate, 1.0);
  ASSERT_TRUE(eval.report.f1_info.has_value());
  EXPECT_DOUBLE_EQ(*eval.report.f1_info, 1.0);
}

TEST(QuestionSearcher, RarestFirst) {
  std::unordered_map<std::string, uint64_t> counts = {
      {"the", 1000}, {"endowment", 3}, {"harvard", 40}, {"2011", 7}, {"total", 90}};
  const Vocabulary table = Vocabulary::FromCounts(counts, 100);
  const auto order =
      QuestionSearchOrder(*testing::HarvardGame(), table, QueryType::kQuestion, nullptr);
  ASSERT_FALSE(order.empty());
  EXPECT_EQ(order.front(), "endowment");
  EXPECT_EQ(order, (std::vector<std::string>{"endowment", "2011", "harvard", "total"}));
}

TEST(QuestionSearcher, ReachesAnswerOnHarvard) {
  const GamePtr game = testing::HarvardGame();
  auto vocab = testing::VocabularyOf({game});
  for (Mode mode : kAllModes) {
    auto agent = MakeQuestionSearcher(vocab);
    const EpisodeResult result = RunEpisode(*agent, game, Config(mode), 0, vocab);
    EXPECT_TRUE(result.sufficient_info) << ModeName(mode);
    EXPECT_LE(result.steps, kDefaultMaxSteps);
    EXPECT_DOUBLE_EQ(result.f1, 1.0);
    for (const StepRecord &record : result.trajectory) {
      if (record.action.kind == ActionKind::kCtrlf) {
        EXPECT_TRUE(std::find(game->normalized_question.begin(), game->normalized_question.end(),
                              record.action.query) != game->normalized_question.end());
      }
    }
  }
}

TEST(QuestionSearcher, AbsentTokensExhaustBudget) {
  auto game = MakeGame("x", "", "Red apples fall. Green pears rise.", "Where do plums grow?",
                       {{"pears", 10}});
  auto vocab = testing::VocabularyOf({game});
  auto agent = MakeQuestionSearcher(vocab);
  const EpisodeResult result = RunEpisode(*agent, game, Config(Mode::kHard), 0, vocab);
  EXPECT_EQ(result.steps, kDefaultMaxSteps);
  EXPECT_TRUE(result.forced_stop);
  EXPECT_DOUBLE_EQ(result.reward, 0.0);
}

TEST(QuestionSearcher, NoContentTokensFallsBack) {
  auto game = MakeGame("x", "", "Red apples fall. Green pears rise.", "What is it?",
                       {{"pears", 10}});
  auto vocab = testing::VocabularyOf({game});
  auto hard = MakeQuestionSearcher(vocab);
  EXPECT_EQ(RunEpisode(*hard, game, Config(Mode::kHard), 0, vocab).steps, 0u);
  auto easy = MakeQuestionSearcher(vocab);
  const EpisodeResult result = RunEpisode(*easy, game, Config(Mode::kEasy), 0, vocab);
  EXPECT_EQ(result.steps, 1u);
  EXPECT_DOUBLE_EQ(result.reward, 1.0);
}

TEST(OracleNavigator, AnswerFirstNeedsNoCommands) {
  auto game = MakeGame("first", "", "Gold here. Nothing there.", "Where?", {{"Gold", 0}});
  auto agent = MakeOracleNavigator();
  EXPECT_EQ(RunEpisode(*agent, game, Config(Mode::kEasy), 0, nullptr).steps, 0u);
}

TEST(OracleNavigator, WrapsBackwardsWhenShorter) {
  auto game = MakeGame("five", "", "A a. B b. C c. D d. E gold.", "Z?", {{"gold", 22}});
  auto agent = MakeOracleNavigator();
  const EpisodeResult result = RunEpisode(*agent, game, Config(Mode::kEasy), 0, nullptr);
  ASSERT_EQ(result.trajectory.size(), 2u);
  EXPECT_EQ(result.trajectory[0].action, Action::Previous());
  EXPECT_DOUBLE_EQ(result.reward, 1.0);
}

TEST(OracleNavigator, DeclinesUnaligned) {
  auto game = MakeGame("u", "", "It ends here. Then it starts.", "Q?", {{"here. Then", 10}});
  auto agent = MakeOracleNavigator();
  EXPECT_TRUE(agent->Declines(*game));
  EXPECT_TRUE(RunEpisode(*agent, game, Config(Mode::kEasy), 0, nullptr).declined);
}

TEST(OracleNavigator, MatchesBruteForceShortestPath) {
  testing::RandomGameOptions options;
  options.max_sentences = 8;
  options.word_pool = 8;
  const auto games = RandomGames(6, 150, options);
  auto vocab = testing::VocabularyOf(games, 6);
  for (Mode mode : kAllModes) {
    for (QueryType type : kAllQueryTypes) {
      const EnvConfig config = Config(mode, type);
      for (const GamePtr &game : games) {
        const auto expected = testing::BruteForceShortestPath(game, config, vocab, 8);
        auto agent = MakeOracleNavigator();
        const EpisodeResult result = RunEpisode(*agent, game, config, 0, vocab);
        if (expected.has_value()) {
          EXPECT_EQ(result.steps, *expected)
              << game->game_id << " " << ModeName(mode) << " " << QueryTypeName(type);
          EXPECT_TRUE(result.sufficient_info);
        } else {
          EXPECT_FALSE(result.sufficient_info && result.steps <= 8) << game->game_id;
        }
      }
    }
  }
}

TEST(OracleNavigator, NeverSlowerThanCyclingReader) {
  const auto games = RandomGames(7, 300);
  const EnvConfig config = Config(Mode::kEasy);
  const auto oracle = Evaluate(MakeAgentFactory("oracle_navigator", nullptr), games, config, 0, nullptr);
  const auto reader = Evaluate(MakeAgentFactory("cycling_reader", nullptr), games, config, 0, nullptr);
  EXPECT_LE(oracle.report.mean_steps, reader.report.mean_steps);
}

TEST(AllAgents, OnlyLegalActionsEverywhere) {
  const auto games = RandomGames(8, 60);
  auto vocab = testing::VocabularyOf(games, 10);
  for (std::string_view name : AgentNames()) {
    const AgentFactory factory = MakeAgentFactory(name, vocab);
    for (Mode mode : kAllModes) {
      for (QueryType type : kAllQueryTypes) {
        for (size_t memory : kStandardMemorySizes) {
          for (size_t i = 0; i < games.size(); ++i) {
            auto agent = factory(EpisodeSeed(1, i));
            ExpectOnlyLegalActions(*agent, games[i], Config(mode, type, memory), vocab);
          }
        }
      }
    }
  }
}

TEST(AgentFactory, UnknownNameListsChoices) {
  try {
    MakeAgentFactory("dqn", nullptr);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("cycling_reader"), std::string::npos);
  }
}

TEST(GoldExtract, ExactSubspan) {
  const TokenSeq observation = Tokenize("It was worth $32 billion in 2011 .");
  const std::vector<std::string> truths = {"$32 billion"};
  EXPECT_EQ(GoldExtract(observation, truths), "$ 32 billion");
}

TEST(GoldExtract, NoOverlapScoresZero) {
  const TokenSeq observation = Tokenize("Nothing relevant here .");
  const std::vector<std::string> truths = {"$32 billion"};
  EXPECT_DOUBLE_EQ(MaxF1(GoldExtract(observation, truths), truths), 0.0);
}

TEST(GoldExtract, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(29);
  const std::vector<std::string> pool = {"a", "the", "red", "fox", "jumps", ",", "over", "dog", "2011", "$"};
  for (int trial = 0; trial < 200; ++trial) {
    TokenSeq observation;
    for (size_t i = 0, n = 1 + rng() % 12; i < n; ++i) observation.push_back(pool[rng() % pool.size()]);
    std::vector<std::string> truths;
    for (size_t t = 0, k = 1 + rng() % 3; t < k; ++t) {
      std::string truth;
      for (size_t i = 0, n = 1 + rng() % 4; i < n; ++i) truth += pool[rng() % pool.size()] + " ";
      truths.push_back(truth);
    }
    const std::string got = GoldExtract(observation, truths);
    const std::string want = testing::BruteForceBestSpan(observation, truths);
    EXPECT_NEAR(MaxF1(got, truths), MaxF1(want, truths), 1e-12) << got << " | " << want;
  }
}

TEST(Evaluate, ErrorsNameTheGame) {
  const GamePtr empty = MakeGameFromDocument("broken-game", "", Document::FromSentences({}), "Q?", {});
  const std::vector<GamePtr> games = {empty};
  try {
    Evaluate(MakeAgentFactory("random", nullptr), games, Config(Mode::kEasy), 0, nullptr);
    FAIL();
  } catch (const Error &e) {
    EXPECT_NE(std::string(e.what()).find("broken-game"), std::string::npos);
  }
}

// Scripted-agent baselines on a fixed synthetic suite, pinned with a 0.02
// tolerance so behavior changes are noticed.
TEST(Baselines, PinnedReports) {
  testing::RandomGameOptions options;
  options.max_sentences = 8;
  options.aligned_probability = 0.8;
  const auto games = RandomGames(2024, 400, options);
  auto vocab = testing::VocabularyOf(games, 10);
  struct Pin {
    std::string_view agent;
    Mode mode;
    double mean_f1, info_rate, mean_steps;
  };
  const Pin pins[] = {
      {"random", Mode::kEasy, 0.350, 0.480, 3.020},
      {"random", Mode::kHard, 0.346, 0.490, 0.988},
      {"cycling_reader", Mode::kEasy, 0.929, 0.902, 2.950},
      {"question_searcher", Mode::kEasy, 0.812, 0.767, 5.305},
      {"question_searcher", Mode::kHard, 0.802, 0.757, 5.228},
      {"oracle_navigator", Mode::kHard, 0.892, 0.873, 0.382},
  };
  for (const Pin &pin : pins) {
    const Evaluation eval =
        Evaluate(MakeAgentFactory(pin.agent, vocab), games, Config(pin.mode), 99, vocab, 2);
    EXPECT_NEAR(eval.report.mean_f1, pin.mean_f1, 0.02) << pin.agent;
    EXPECT_NEAR(eval.report.sufficient_info_rate, pin.info_rate, 0.02) << pin.agent;
    EXPECT_NEAR(eval.report.mean_steps, pin.mean_steps, 0.02 * std::max(1.0, pin.mean_steps)) << pin.agent;
  }
}

}  // namespace
}  // namespace imrc
