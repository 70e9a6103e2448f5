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

#ifndef IMRC_SCORING_H_
#define IMRC_SCORING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imrc/text.h"

namespace imrc {

// Extractive-QA answer normalization: lowercase, drop ASCII punctuation, drop
// the articles a/an/the, split on whitespace.
TokenSeq NormalizeAnswer(std::string_view text);

// Bag-of-tokens F1 over normalized answers. Both sides empty scores 1, one
// side empty scores 0.
double TokenF1(std::string_view prediction, std::string_view truth);
double TokenF1(std::span<const std::string> prediction,
               std::span<const std::string> truth);

// Throws Error(kInvalidArgument) when `truths` is empty.
double MaxF1(std::string_view prediction, std::span<const std::string> truths);

// Scoring view of one finished episode.
struct ScoredEpisode {
  double f1 = 0.0;
  bool sufficient_info = false;
  size_t steps = 0;
  bool declined = false;
};

struct MetricReport {
  double mean_f1 = 0.0;
  // Empty when no episode ended with sufficient information.
  std::optional<double> f1_info;
  double sufficient_info_rate = 0.0;
  double mean_steps = 0.0;
  size_t episode_count = 0;
  // Episodes an agent declined; excluded from every other field.
  size_t declined_count = 0;
};

// Throws Error(kInvalidArgument) when no scorable episode is given.
MetricReport Aggregate(std::span<const ScoredEpisode> episodes);

// "0.666 (0.812)": F1 with F1-info in parentheses, "n/a" when undefined.
std::string FormatF1Cell(const MetricReport &report);
std::string FormatReportTable(std::span<const std::pair<std::string, MetricReport>> rows);
std::string ReportToJson(const MetricReport &report);

}  // namespace imrc

#endif  // IMRC_SCORING_H_
