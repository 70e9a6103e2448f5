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

#include "support/test_games.h"

#include <unordered_map>

#include "json.hpp"

namespace imrc::testing {

std::string HarvardContext() {
  return "Harvard has the largest university endowment in the world. At the "
         "end of June 2009, it was worth $25.7 billion, about 30% less than at "
         "the same time in 2008. In December 2008, Harvard announced that its "
         "endowment had lost 22% from July to October 2008, necessitating "
         "budget cuts. As of September 2011, it had nearly regained the loss "
         "suffered during the 2008 recession. It was worth $32 billion in 2011, "
         "up from $28 billion in September 2010 and $26 billion in 2009.";
}

GamePtr HarvardGame() {
  const std::string context = HarvardContext();
  const int64_t start = static_cast<int64_t>(context.find("$32 billion"));
  return MakeGame("harvard-endowment", "Harvard_University", context,
                  "What was the Harvard endowment total in 2011?",
                  {{"$32 billion", start}});
}

std::string HarvardSquadJson() {
  const std::string context = HarvardContext();
  nlohmann::json qa{{"id", "harvard-endowment"},
                    {"question", "What was the Harvard endowment total in 2011?"},
                    {"answers",
                     {{{"text", "$32 billion"},
                       {"answer_start", context.find("$32 billion")}}}}};
  nlohmann::json root{
      {"version", "1.1"},
      {"data",
       {{{"title", "Harvard_University"},
         {"paragraphs", {{{"context", context}, {"qas", {qa}}}}}}}}};
  return root.dump();
}

GamePtr RandomGame(std::mt19937_64 &rng, const RandomGameOptions &options,
                   const std::string &id) {
  const auto pick = [&](size_t lo, size_t hi) { return lo + rng() % (hi - lo + 1); };
  const auto word = [&] { return "w" + std::to_string(rng() % options.word_pool); };
  const size_t n = pick(options.min_sentences, options.max_sentences);
  std::vector<std::string> raw;
  std::vector<std::vector<std::string>> words(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t length = pick(1, options.max_sentence_length);
    std::string sentence;
    for (size_t j = 0; j < length; ++j) {
      words[i].push_back(word());
      if (j > 0) sentence += ' ';
      sentence += words[i].back();
    }
    raw.push_back(std::move(sentence));
  }
  auto document = Document::FromSentences(std::move(raw));

  std::string question;
  const size_t question_length = pick(1, 5);
  for (size_t j = 0; j < question_length; ++j) {
    if (j > 0) question += ' ';
    question += word();
  }

  std::vector<Answer> answers;
  const size_t answer_count = pick(1, 2);
  for (size_t a = 0; a < answer_count; ++a) {
    std::string text;
    const bool aligned =
        static_cast<double>(rng() % 1000) / 1000.0 < options.aligned_probability;
    if (aligned) {
      const size_t sentence = rng() % n;
      const size_t begin = rng() % words[sentence].size();
      const size_t end = begin + 1 + rng() % (words[sentence].size() - begin);
      for (size_t j = begin; j < end; ++j) {
        if (j > begin) text += ' ';
        text += words[sentence][j];
      }
    } else {
      const size_t length = pick(1, 3);
      for (size_t j = 0; j < length; ++j) {
        if (j > 0) text += ' ';
        text += word();
      }
    }
    Answer answer;
    answer.text = text;
    answer.tokens = NormalizeTokens(Tokenize(text));
    for (size_t i = 0; i < n; ++i) {
      if (ContainsSubsequence(document->normalized[i], answer.tokens)) {
        answer.sentence = i;
        break;
      }
    }
    answers.push_back(std::move(answer));
  }
  return MakeGameFromDocument(id, "random", document, std::move(question),
                              std::move(answers));
}

std::shared_ptr<const Vocabulary> VocabularyOf(const std::vector<GamePtr> &games,
                                               size_t cap) {
  std::unordered_map<std::string, uint64_t> counts;
  for (const GamePtr &game : games) {
    for (const TokenSeq &sentence : game->document->normalized) {
      for (const std::string &token : sentence) ++counts[token];
    }
    for (const std::string &token : game->normalized_question) ++counts[token];
  }
  return std::make_shared<const Vocabulary>(Vocabulary::FromCounts(counts, cap));
}

}  // namespace imrc::testing
