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

#ifndef IMRC_AGENTS_H_
#define IMRC_AGENTS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imrc/corpus.h"
#include "imrc/env.h"
#include "imrc/scoring.h"

namespace imrc {

// Scripted policy. Agents may read the privileged EnvState (hidden sentences,
// ground truths); they are oracles and baselines, not learners.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;

  // Agents that cannot play a game are never run on it.
  virtual bool Declines(const GameSpec & /*game*/) const { return false; }

  virtual void Begin(const EnvState & /*state*/,
                     const Observation & /*observation*/) {}
  virtual Action Act(const EnvState &state, const Observation &observation) = 0;
  virtual std::string Predict(const EnvState &state,
                              const Observation &final_observation) = 0;
};

// Stop is drawn with probability max(1/|legal actions|, 1/max_steps); the
// rest of the mass is spread over the other legal kinds and then over the
// legal query tokens. Predicts the whole final observation.
std::unique_ptr<Agent> MakeRandomAgent(uint64_t seed);

// next until the observation holds an answer, then stop. In hard mode next is
// masked, so it stops at once.
std::unique_ptr<Agent> MakeCyclingReader();

// Ctrl+F over the question's content tokens, rarest first by corpus
// frequency. A token is repeated while it keeps landing on sentences it has
// not visited yet, then the next token is tried, cycling.
std::unique_ptr<Agent> MakeQuestionSearcher(
    std::shared_ptr<const Vocabulary> frequency_table);

// Follows a shortest command sequence to a sentence holding an answer.
// Declines unaligned games.
std::unique_ptr<Agent> MakeOracleNavigator();

inline constexpr int kStopwordListVersion = 1;
std::span<const std::string_view> Stopwords();

// Query order used by the question searcher for `game` under `query_type`.
// `vocabulary` restricts candidates for QueryType::kVocabulary.
std::vector<std::string> QuestionSearchOrder(const GameSpec &game,
                                             const Vocabulary &frequency_table,
                                             QueryType query_type,
                                             const Vocabulary *vocabulary);

// Breadth-first search over sentence indices from the first sentence.
// Returns nullopt when no answer sentence is reachable.
std::optional<std::vector<Action>> PlanShortestPath(const GameSpec &game,
                                                    const EnvConfig &config,
                                                    const Vocabulary *vocabulary);

// Sub-span of the observation equal to a ground truth when one is present;
// otherwise the span with the highest max-F1, ties broken leftmost then
// shortest.
std::string GoldExtract(std::span<const std::string> observation_tokens,
                        std::span<const std::string> truths);

using AgentFactory = std::function<std::unique_ptr<Agent>(uint64_t seed)>;

std::span<const std::string_view> AgentNames();
// Throws Error(kInvalidArgument) listing the available agents.
AgentFactory MakeAgentFactory(std::string_view name,
                              std::shared_ptr<const Vocabulary> vocabulary);

// Per-episode seed derived from a run seed.
uint64_t EpisodeSeed(uint64_t base_seed, size_t index);

EpisodeResult RunEpisode(Agent &agent, GamePtr game, const EnvConfig &config,
                         uint64_t seed,
                         std::shared_ptr<const Vocabulary> vocabulary);

struct Evaluation {
  MetricReport report;
  std::vector<EpisodeResult> episodes;
};

// One episode per game, seeds from EpisodeSeed(base_seed, index). Episodes
// may run on `threads` workers; results keep game order. Errors are rethrown
// naming the offending game.
Evaluation Evaluate(const AgentFactory &factory, std::span<const GamePtr> games,
                    const EnvConfig &config, uint64_t base_seed,
                    std::shared_ptr<const Vocabulary> vocabulary,
                    size_t threads = 1);

}  // namespace imrc

#endif  // IMRC_AGENTS_H_
