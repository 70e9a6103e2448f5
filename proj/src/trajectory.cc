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

#include "imrc/trajectory.h"

#include "imrc/status.h"

namespace imrc {
namespace {

using nlohmann::json;

[[noreturn]] void BadRequest(const std::string &message) {
  throw Error(ErrorCode::kBadRequest, message);
}

template <typename T>
T Get(const json &object, const char *name, T fallback) {
  auto it = object.find(name);
  if (it == object.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    BadRequest(std::string("field '") + name + "' has the wrong type");
  }
}

StepInfo StepInfoFromJson(const json &record) {
  StepInfo info;
  if (auto it = record.find("query_found"); it != record.end() && !it->is_null()) {
    info.query_found = it->get<bool>();
  }
  info.forced_stop = Get<bool>(record, "forced_stop", false);
  if (auto it = record.find("sufficient_info"); it != record.end() && !it->is_null()) {
    info.sufficient_info = it->get<bool>();
  }
  return info;
}

}  // namespace

Trajectory MakeTrajectory(const EpisodeResult &result, std::string agent) {
  Trajectory trajectory;
  trajectory.game_id = result.game_id;
  trajectory.agent = std::move(agent);
  trajectory.config = result.config;
  trajectory.seed = result.seed;
  trajectory.initial_digest = result.initial_digest;
  trajectory.steps = result.trajectory;
  trajectory.prediction = result.prediction;
  trajectory.f1 = result.f1;
  trajectory.reward = result.reward;
  trajectory.sufficient_info = result.sufficient_info;
  trajectory.forced_stop = result.forced_stop;
  trajectory.step_count = result.steps;
  trajectory.declined = result.declined;
  return trajectory;
}

json ConfigToJson(const EnvConfig &config) {
  return json{{"mode", ModeName(config.mode)},
              {"query_type", QueryTypeName(config.query_type)},
              {"memory_slots", config.memory_slots},
              {"max_steps", config.max_steps},
              {"reward_value", config.reward_value},
              {"discount_gamma", config.discount_gamma},
              {"memory_dedup", config.memory_dedup}};
}

EnvConfig ConfigFromJson(const json &object) {
  if (!object.is_object()) BadRequest("config must be an object");
  EnvConfig config;
  const std::string mode = Get<std::string>(object, "mode", "easy");
  const std::string query_type = Get<std::string>(object, "query_type", "question");
  std::optional<Mode> parsed_mode = ParseMode(mode);
  if (!parsed_mode) BadRequest("unknown mode '" + mode + "'");
  std::optional<QueryType> parsed_type = ParseQueryType(query_type);
  if (!parsed_type) BadRequest("unknown query_type '" + query_type + "'");
  config.mode = *parsed_mode;
  config.query_type = *parsed_type;
  config.memory_slots = Get<size_t>(object, "memory_slots", config.memory_slots);
  config.max_steps = Get<size_t>(object, "max_steps", config.max_steps);
  config.reward_value = Get<double>(object, "reward_value", config.reward_value);
  config.discount_gamma = Get<double>(object, "discount_gamma", config.discount_gamma);
  config.memory_dedup = Get<bool>(object, "memory_dedup", config.memory_dedup);
  return config;
}

json ActionToJson(const Action &action) {
  json out{{"kind", ActionKindName(action.kind)}};
  if (action.kind == ActionKind::kCtrlf) out["query"] = action.query;
  return out;
}

Action ActionFromJson(const json &object) {
  if (!object.is_object()) BadRequest("action must be an object");
  const std::string kind = Get<std::string>(object, "kind", "");
  std::optional<ActionKind> parsed = ParseActionKind(kind);
  if (!parsed) BadRequest("unknown action kind '" + kind + "'");
  Action action{*parsed, {}};
  if (action.kind == ActionKind::kCtrlf) {
    action.query = Get<std::string>(object, "query", "");
    if (action.query.empty()) BadRequest("ctrlf needs a query token");
  }
  return action;
}

json StepInfoToJson(const StepInfo &info) {
  json out{{"forced_stop", info.forced_stop}};
  out["query_found"] = info.query_found.has_value() ? json(*info.query_found) : json(nullptr);
  out["sufficient_info"] =
      info.sufficient_info.has_value() ? json(*info.sufficient_info) : json(nullptr);
  return out;
}

json TrajectoryToJson(const Trajectory &trajectory) {
  json steps = json::array();
  for (const StepRecord &step : trajectory.steps) {
    json record = StepInfoToJson(step.info);
    record["action"] = ActionToJson(step.action);
    record["digest"] = step.digest;
    record["reward"] = step.reward;
    steps.push_back(std::move(record));
  }
  return json{{"type", "episode"},
              {"game_id", trajectory.game_id},
              {"agent", trajectory.agent},
              {"config", ConfigToJson(trajectory.config)},
              {"seed", trajectory.seed},
              {"initial_digest", trajectory.initial_digest},
              {"steps", std::move(steps)},
              {"prediction", trajectory.prediction},
              {"f1", trajectory.f1},
              {"reward", trajectory.reward},
              {"sufficient_info", trajectory.sufficient_info},
              {"forced_stop", trajectory.forced_stop},
              {"step_count", trajectory.step_count},
              {"declined", trajectory.declined},
              {"aborted", trajectory.aborted}};
}

Trajectory TrajectoryFromJson(const json &object) {
  Trajectory trajectory;
  try {
    trajectory.game_id = object.at("game_id").get<std::string>();
    trajectory.agent = object.value("agent", "");
    trajectory.config = ConfigFromJson(object.at("config"));
    trajectory.seed = object.at("seed").get<uint64_t>();
    trajectory.initial_digest = object.value("initial_digest", "");
    for (const json &record : object.at("steps")) {
      StepRecord step;
      step.action = ActionFromJson(record.at("action"));
      step.digest = record.at("digest").get<std::string>();
      step.reward = record.at("reward").get<double>();
      step.info = StepInfoFromJson(record);
      trajectory.steps.push_back(std::move(step));
    }
    trajectory.prediction = object.value("prediction", "");
    trajectory.f1 = object.value("f1", 0.0);
    trajectory.reward = object.value("reward", 0.0);
    trajectory.sufficient_info = object.value("sufficient_info", false);
    trajectory.forced_stop = object.value("forced_stop", false);
    trajectory.step_count = object.value("step_count", size_t{0});
    trajectory.declined = object.value("declined", false);
    trajectory.aborted = object.value("aborted", false);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchemaError, std::string("bad trajectory record: ") + e.what());
  }
  return trajectory;
}

json TrajectoryLogHeader(json run, std::string corpus_hash) {
  return json{{"type", "header"},
              {"format", "imrc-trajectory"},
              {"version", kTrajectoryFormatVersion},
              {"engine_version", kEngineVersion},
              {"corpus_hash", std::move(corpus_hash)},
              {"run", std::move(run)}};
}

TrajectoryLogWriter::TrajectoryLogWriter(const std::filesystem::path &path,
                                         const json &header)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out_ << header.dump() << '\n';
}

void TrajectoryLogWriter::Append(const Trajectory &trajectory) {
  out_ << TrajectoryToJson(trajectory).dump() << '\n';
}

void TrajectoryLogWriter::Flush() { out_.flush(); }

void TrajectoryLogWriter::Close() {
  if (out_.is_open()) out_.close();
}

std::string SerializeTrajectoryLog(const json &header,
                                   const std::vector<Trajectory> &trajectories) {
  std::string out = header.dump();
  out += '\n';
  for (const Trajectory &trajectory : trajectories) {
    out += TrajectoryToJson(trajectory).dump();
    out += '\n';
  }
  return out;
}

TrajectoryLog ParseTrajectoryLog(std::string_view text) {
  TrajectoryLog log;
  size_t pos = 0;
  size_t line_number = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line.begin(), line.end());
    } catch (const json::parse_error &e) {
      throw Error(ErrorCode::kParseError, "trajectory log line " +
                                              std::to_string(line_number) + " byte " +
                                              std::to_string(e.byte) + ": malformed JSON");
    } catch (const json::exception &e) {
      throw Error(ErrorCode::kParseError, "trajectory log line " +
                                              std::to_string(line_number) + ": " + e.what());
    }
    if (line_number == 1) {
      if (!record.is_object() || record.value("format", "") != "imrc-trajectory") {
        throw Error(ErrorCode::kSchemaError, "not an imrc trajectory log");
      }
      if (record.value("version", -1) != kTrajectoryFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch,
                    "trajectory log version " + record.value("version", json(nullptr)).dump() +
                        " is incompatible with version " +
                        std::to_string(kTrajectoryFormatVersion));
      }
      log.header = std::move(record);
      continue;
    }
    log.trajectories.push_back(TrajectoryFromJson(record));
  }
  if (log.header.is_null()) throw Error(ErrorCode::kSchemaError, "empty trajectory log");
  return log;
}

TrajectoryLog ReadTrajectoryLog(const std::filesystem::path &path) {
  return ParseTrajectoryLog(ReadFileToString(path));
}

std::string ReplayReport::Summary() const {
  std::string out = "replayed " + std::to_string(episodes_checked) + " episodes, " +
                    std::to_string(steps_checked) + " steps: ";
  if (ok()) return out + "OK";
  out += std::to_string(divergences.size()) + " divergent episode(s)";
  const Divergence &first = divergences.front();
  out += "; first at episode " + std::to_string(first.episode) + " (game " +
         first.game_id + ") ";
  out += first.step.has_value() ? "step " + std::to_string(*first.step) : "reset";
  out += ": " + first.reason;
  return out;
}

ReplayReport Replay(const TrajectoryLog &log, const Corpus &corpus) {
  ReplayReport report;
  for (size_t e = 0; e < log.trajectories.size(); ++e) {
    const Trajectory &trajectory = log.trajectories[e];
    if (trajectory.declined) continue;
    ++report.episodes_checked;
    const auto diverge = [&](std::optional<size_t> step, std::string reason) {
      report.divergences.push_back({e, trajectory.game_id, step, std::move(reason)});
    };
    const GamePtr *game = corpus.Find(trajectory.game_id);
    if (game == nullptr) {
      diverge(std::nullopt, "game not in corpus");
      continue;
    }
    std::optional<EnvState> state;
    try {
      auto [fresh, observation] =
          Reset(*game, trajectory.config, trajectory.seed, corpus.vocabulary);
      if (ObservationDigest(observation) != trajectory.initial_digest) {
        diverge(std::nullopt, "initial observation digest differs");
        continue;
      }
      state.emplace(std::move(fresh));
    } catch (const Error &error) {
      diverge(std::nullopt, error.what());
      continue;
    }
    for (size_t i = 0; i < trajectory.steps.size(); ++i) {
      const StepRecord &expected = trajectory.steps[i];
      ++report.steps_checked;
      try {
        StepOutcome outcome = Step(*state, expected.action);
        if (ObservationDigest(outcome.observation) != expected.digest) {
          diverge(i, "observation digest differs after " + expected.action.ToString());
          break;
        }
        if (outcome.reward != expected.reward || !(outcome.info == expected.info)) {
          diverge(i, "reward or step flags differ after " + expected.action.ToString());
          break;
        }
      } catch (const Error &error) {
        diverge(i, std::string(expected.action.ToString()) + " rejected: " + error.what());
        break;
      }
    }
  }
  return report;
}

}  // namespace imrc
