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

#include "imrc/scoring.h"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "imrc/status.h"
#include "json.hpp"

namespace imrc {
namespace {

bool IsAsciiPunct(unsigned char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

bool IsWordByte(unsigned char c) {
  return c >= 0x80 || c == '_' || (c >= '0' && c <= '9') ||
         (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool IsSpaceByte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

TokenSeq NormalizeAnswer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsAsciiPunct(c)) continue;
    cleaned += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
  }
  // Articles are whole runs of word characters.
  std::string stripped;
  stripped.reserve(cleaned.size());
  size_t pos = 0;
  while (pos < cleaned.size()) {
    if (!IsWordByte(static_cast<unsigned char>(cleaned[pos]))) {
      stripped += cleaned[pos++];
      continue;
    }
    size_t end = pos;
    while (end < cleaned.size() &&
           IsWordByte(static_cast<unsigned char>(cleaned[end]))) {
      ++end;
    }
    std::string_view word(cleaned.data() + pos, end - pos);
    if (word == "a" || word == "an" || word == "the") {
      stripped += ' ';
    } else {
      stripped.append(word);
    }
    pos = end;
  }
  TokenSeq tokens;
  pos = 0;
  while (pos < stripped.size()) {
    while (pos < stripped.size() &&
           IsSpaceByte(static_cast<unsigned char>(stripped[pos]))) {
      ++pos;
    }
    size_t end = pos;
    while (end < stripped.size() &&
           !IsSpaceByte(static_cast<unsigned char>(stripped[end]))) {
      ++end;
    }
    if (end > pos) tokens.emplace_back(stripped, pos, end - pos);
    pos = end;
  }
  return tokens;
}

double TokenF1(std::span<const std::string> prediction,
               std::span<const std::string> truth) {
  if (prediction.empty() || truth.empty()) {
    return prediction.empty() && truth.empty() ? 1.0 : 0.0;
  }
  std::unordered_map<std::string_view, int> counts;
  for (const std::string &token : truth) ++counts[token];
  size_t overlap = 0;
  for (const std::string &token : prediction) {
    auto it = counts.find(token);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision =
      static_cast<double>(overlap) / static_cast<double>(prediction.size());
  const double recall =
      static_cast<double>(overlap) / static_cast<double>(truth.size());
  return 2.0 * precision * recall / (precision + recall);
}

double TokenF1(std::string_view prediction, std::string_view truth) {
  return TokenF1(NormalizeAnswer(prediction), NormalizeAnswer(truth));
}

double MaxF1(std::string_view prediction, std::span<const std::string> truths) {
  if (truths.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "max-F1 needs at least one truth");
  }
  const TokenSeq predicted = NormalizeAnswer(prediction);
  double best = 0.0;
  for (const std::string &truth : truths) {
    best = std::max(best, TokenF1(predicted, NormalizeAnswer(truth)));
  }
  return best;
}

MetricReport Aggregate(std::span<const ScoredEpisode> episodes) {
  MetricReport report;
  double f1_sum = 0.0;
  double info_sum = 0.0;
  size_t info_count = 0;
  size_t step_sum = 0;
  for (const ScoredEpisode &episode : episodes) {
    if (episode.declined) {
      ++report.declined_count;
      continue;
    }
    ++report.episode_count;
    f1_sum += episode.f1;
    step_sum += episode.steps;
    if (episode.sufficient_info) {
      ++info_count;
      info_sum += episode.f1;
    }
  }
  if (report.episode_count == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot aggregate an empty episode list");
  }
  const double n = static_cast<double>(report.episode_count);
  report.mean_f1 = f1_sum / n;
  report.sufficient_info_rate = static_cast<double>(info_count) / n;
  report.mean_steps = static_cast<double>(step_sum) / n;
  if (info_count > 0) {
    report.f1_info = info_sum / static_cast<double>(info_count);
  }
  return report;
}

std::string FormatF1Cell(const MetricReport &report) {
  char buffer[64];
  if (report.f1_info.has_value()) {
    std::snprintf(buffer, sizeof(buffer), "%.3f (%.3f)", report.mean_f1,
                  *report.f1_info);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%.3f (n/a)", report.mean_f1);
  }
  return buffer;
}

std::string FormatReportTable(
    std::span<const std::pair<std::string, MetricReport>> rows) {
  int width = 8;
  for (const auto &row : rows) {
    width = std::max(width, static_cast<int>(row.first.size()) + 1);
  }
  char buffer[256];
  std::string out;
  std::snprintf(buffer, sizeof(buffer), "%-*s| %-16s| %-9s| %-10s| %s\n",
                width, "Setting", "F1 (F1_info)", "info rate", "mean steps",
                "episodes");
  out += buffer;
  out += std::string(width, '-') + "+" + std::string(17, '-') + "+" +
         std::string(10, '-') + "+" + std::string(11, '-') + "+" +
         std::string(9, '-') + "\n";
  for (const auto &[label, report] : rows) {
    out += label + std::string(width - label.size(), ' ');
    std::snprintf(buffer, sizeof(buffer), "| %-16s| %-9.3f| %-10.2f| %zu\n",
                  FormatF1Cell(report).c_str(), report.sufficient_info_rate,
                  report.mean_steps, report.episode_count);
    out += buffer;
  }
  return out;
}

std::string ReportToJson(const MetricReport &report) {
  nlohmann::json out{{"mean_f1", report.mean_f1},
                     {"sufficient_info_rate", report.sufficient_info_rate},
                     {"mean_steps", report.mean_steps},
                     {"episode_count", report.episode_count},
                     {"declined_count", report.declined_count}};
  out["f1_info"] = report.f1_info.has_value() ? nlohmann::json(*report.f1_info)
                                              : nlohmann::json(nullptr);
  return out.dump();
}

}  // namespace imrc
