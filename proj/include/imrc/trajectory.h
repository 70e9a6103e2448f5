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

#ifndef IMRC_TRAJECTORY_H_
#define IMRC_TRAJECTORY_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imrc/corpus.h"
#include "imrc/env.h"
#include "json.hpp"

namespace imrc {

inline constexpr int kTrajectoryFormatVersion = 1;
inline constexpr std::string_view kEngineVersion = "1.0.0";

// Replayable record of one episode.
struct Trajectory {
  std::string game_id;
  std::string agent;
  EnvConfig config;
  uint64_t seed = 0;
  std::string initial_digest;
  std::vector<StepRecord> steps;
  std::string prediction;
  double f1 = 0.0;
  double reward = 0.0;
  bool sufficient_info = false;
  bool forced_stop = false;
  size_t step_count = 0;
  bool declined = false;
  // Set when an interactive session quit before finalizing.
  bool aborted = false;
};

Trajectory MakeTrajectory(const EpisodeResult &result, std::string agent);

nlohmann::json ConfigToJson(const EnvConfig &config);
// Missing fields keep their defaults. Throws Error(kBadRequest) for bad enum
// names or wrong types.
EnvConfig ConfigFromJson(const nlohmann::json &json);

nlohmann::json ActionToJson(const Action &action);
Action ActionFromJson(const nlohmann::json &json);

nlohmann::json StepInfoToJson(const StepInfo &info);

nlohmann::json TrajectoryToJson(const Trajectory &trajectory);
Trajectory TrajectoryFromJson(const nlohmann::json &json);

// Header record shared by every log: format, version, engine version, plus
// caller-provided run metadata.
nlohmann::json TrajectoryLogHeader(nlohmann::json run, std::string corpus_hash);

// Newline-delimited log: one header line, then one line per episode.
class TrajectoryLogWriter {
 public:
  TrajectoryLogWriter() = default;
  TrajectoryLogWriter(const std::filesystem::path &path, const nlohmann::json &header);

  bool is_open() const { return out_.is_open(); }
  void Append(const Trajectory &trajectory);
  void Flush();
  void Close();

 private:
  std::ofstream out_;
};

std::string SerializeTrajectoryLog(const nlohmann::json &header,
                                   const std::vector<Trajectory> &trajectories);

struct TrajectoryLog {
  nlohmann::json header;
  std::vector<Trajectory> trajectories;
};

// Throws Error(kVersionMismatch) for logs from another format version.
TrajectoryLog ParseTrajectoryLog(std::string_view text);
TrajectoryLog ReadTrajectoryLog(const std::filesystem::path &path);

struct Divergence {
  size_t episode = 0;
  std::string game_id;
  // Zero-based step index; nullopt when the initial observation differs.
  std::optional<size_t> step;
  std::string reason;
};

struct ReplayReport {
  size_t episodes_checked = 0;
  size_t steps_checked = 0;
  std::vector<Divergence> divergences;

  bool ok() const { return divergences.empty(); }
  std::string Summary() const;
};

// Re-executes every action and compares observation digests, rewards and
// step flags. Stops each episode at its first divergence.
ReplayReport Replay(const TrajectoryLog &log, const Corpus &corpus);

}  // namespace imrc

#endif  // IMRC_TRAJECTORY_H_
