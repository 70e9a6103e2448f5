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

#ifndef IMRC_TESTS_SUPPORT_TEST_GAMES_H_
#define IMRC_TESTS_SUPPORT_TEST_GAMES_H_

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "imrc/corpus.h"

namespace imrc::testing {

// The five-sentence endowment paragraph from the worked trajectory, with the
// question "What was the Harvard endowment total in 2011?" and the single
// answer "$32 billion".
std::string HarvardContext();
GamePtr HarvardGame();
std::string HarvardSquadJson();

struct RandomGameOptions {
  size_t min_sentences = 1;
  size_t max_sentences = 10;
  size_t max_sentence_length = 6;
  size_t word_pool = 12;
  // Probability that the answer is copied from a sentence; otherwise it is a
  // random token run that may or may not occur.
  double aligned_probability = 1.0;
};

// Sentences of words "w0".."w<pool-1>"; the question draws from the same pool.
GamePtr RandomGame(std::mt19937_64 &rng, const RandomGameOptions &options,
                   const std::string &id);

std::shared_ptr<const Vocabulary> VocabularyOf(const std::vector<GamePtr> &games,
                                               size_t cap = 200000);

}  // namespace imrc::testing

#endif  // IMRC_TESTS_SUPPORT_TEST_GAMES_H_
