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

// imrc: convert corpora, run scripted agents, serve the protocol, replay logs
// and play games by hand.
//
// Exit status: 0 success, 2 bad input (flags, files, data), 3 runtime
// failure, 4 replay found divergences.

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "imrc/agents.h"
#include "imrc/corpus.h"
#include "imrc/digest.h"
#include "imrc/env.h"
#include "imrc/scoring.h"
#include "imrc/service.h"
#include "imrc/status.h"
#include "imrc/trajectory.h"
#include "json.hpp"

namespace imrc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitDivergence = 4;

std::atomic<bool> g_stop{false};

void HandleSignal(int) { g_stop.store(true); }

void InstallSignalHandlers() {
  struct sigaction action {};
  action.sa_handler = HandleSignal;
  sigemptyset(&action.sa_mask);
  sigaction(SIGINT, &action, nullptr);
  sigaction(SIGTERM, &action, nullptr);
}

// Everything that determines an output, embedded in every header.
struct RunConfig {
  EnvConfig env;
  std::string split = "train";
  std::string agent = "cycling_reader";
  uint64_t seed = 0;
  std::optional<size_t> limit;
  bool aligned_only = false;
  std::string corpus;
  std::string out;
};

json RunConfigToJson(const RunConfig &run) {
  json out = ConfigToJson(run.env);
  out["split"] = run.split;
  out["agent"] = run.agent;
  out["seed"] = run.seed;
  out["limit"] = run.limit ? json(*run.limit) : json(nullptr);
  out["aligned_only"] = run.aligned_only;
  out["corpus"] = run.corpus;
  out["out"] = run.out;
  return out;
}

// Flags shared by the subcommands that run episodes. Values stay empty
// unless given so that a config file can supply them.
struct RunFlags {
  std::string config_file;
  std::string mode, query_type, split, agent, corpus, out;
  std::optional<size_t> memory, max_steps, limit;
  std::optional<double> reward;
  std::optional<uint64_t> seed;
  bool aligned_only = false;
  bool no_dedup = false;

  void Register(CLI::App &app, bool with_agent) {
    app.add_option("--config", config_file, "JSON file with run settings; flags override it")
        ->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "easy or hard")->check(CLI::IsMember({"easy", "hard"}));
    app.add_option("--query-type", query_type, "question, question+memory or vocab")
        ->check(CLI::IsMember({"question", "question+memory", "vocab"}));
    app.add_option("--memory", memory, "memory queue slots (1, 3 and 5 are standard)");
    app.add_option("--max-steps", max_steps, "information-gathering step budget");
    app.add_option("--reward", reward, "terminal reward for sufficient information");
    app.add_flag("--no-dedup", no_dedup, "keep repeated sentences in memory");
    app.add_option("--split", split, "corpus split name");
    app.add_option("--corpus", corpus, "corpus file (default: $IMRC_CORPUS_DIR/<split>.ndjson)");
    app.add_option("--seed", seed, "run seed");
    app.add_option("--out", out, "trajectory log path");
    if (with_agent) {
      app.add_option("--agent", agent, "scripted agent name");
      app.add_option("--limit", limit, "use only the first N games");
      app.add_flag("--aligned-only", aligned_only, "skip games whose answer spans sentences");
    }
  }

  RunConfig Resolve() const {
    RunConfig run;
    if (!config_file.empty()) {
      json file;
      try {
        file = json::parse(ReadFileToString(config_file));
      } catch (const json::exception &e) {
        throw Error(ErrorCode::kParseError, config_file + ": " + e.what());
      }
      if (!file.is_object()) throw Error(ErrorCode::kSchemaError, config_file + ": not an object");
      try {
        run.env = ConfigFromJson(file);
        run.split = file.value("split", run.split);
        run.agent = file.value("agent", run.agent);
        run.seed = file.value("seed", run.seed);
        if (file.contains("limit") && !file["limit"].is_null()) run.limit = file["limit"].get<size_t>();
        run.aligned_only = file.value("aligned_only", run.aligned_only);
        run.corpus = file.value("corpus", run.corpus);
        run.out = file.value("out", run.out);
      } catch (const json::exception &e) {
        throw Error(ErrorCode::kSchemaError, config_file + ": " + e.what());
      }
    }
    if (!mode.empty()) run.env.mode = *ParseMode(mode);
    if (!query_type.empty()) run.env.query_type = *ParseQueryType(query_type);
    if (memory) run.env.memory_slots = *memory;
    if (max_steps) run.env.max_steps = *max_steps;
    if (reward) run.env.reward_value = *reward;
    if (no_dedup) run.env.memory_dedup = false;
    if (!split.empty()) run.split = split;
    if (!agent.empty()) run.agent = agent;
    if (seed) run.seed = *seed;
    if (limit) run.limit = *limit;
    if (aligned_only) run.aligned_only = true;
    if (!corpus.empty()) run.corpus = corpus;
    if (!out.empty()) run.out = out;
    run.env.Validate();
    return run;
  }
};

fs::path CorpusPathFor(const std::string &explicit_path, const std::string &split) {
  if (!explicit_path.empty()) return explicit_path;
  const char *dir = std::getenv("IMRC_CORPUS_DIR");
  if (dir == nullptr || *dir == '\0') {
    throw Error(ErrorCode::kInvalidArgument, "no corpus given: pass --corpus or set IMRC_CORPUS_DIR");
  }
  return fs::path(dir) / (split + ".ndjson");
}

std::string HeaderLine(std::string_view command, const json &run, const std::string &corpus_hash) {
  return "# imrc " + std::string(command) + " " +
         json{{"engine_version", kEngineVersion}, {"corpus_hash", corpus_hash}, {"run", run}}.dump();
}

std::vector<GamePtr> SelectGames(const Corpus &corpus, const RunConfig &run) {
  std::vector<GamePtr> games;
  for (const GamePtr &game : corpus.games) {
    if (run.aligned_only && !game->aligned()) continue;
    games.push_back(game);
    if (run.limit && games.size() == *run.limit) break;
  }
  if (games.empty()) throw Error(ErrorCode::kInvalidArgument, "no games selected");
  return games;
}

// ---------------------------------------------------------------------------

struct ConvertFlags {
  std::string input, out;
  ConvertOptions options;
  std::optional<size_t> article_count;
};

int Convert(const ConvertFlags &flags) {
  ConvertOptions options = flags.options;
  options.article_count = flags.article_count;
  const std::string text = ReadFileToString(flags.input);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorCode::kParseError, flags.input + ": empty input");
  }
  RawDataset dataset;
  try {
    dataset = ParseSquadFormat(text);
  } catch (const Error &e) {
    throw Error(e.code(), flags.input + ": " + e.what());
  }
  Corpus corpus = BuildCorpus(dataset, options, fs::path(flags.input).filename().string(),
                              Sha256Hex(text));
  fs::path out = flags.out;
  if (out.empty()) {
    out = CorpusPathFor("", options.split);
    fs::create_directories(out.parent_path());
  }
  WriteCorpus(out, corpus);
  std::cout << "# imrc convert "
            << json{{"engine_version", kEngineVersion},
                    {"corpus_hash", corpus.content_hash},
                    {"source", corpus.source},
                    {"source_sha256", corpus.source_sha256},
                    {"config_hash", corpus.config_hash},
                    {"out", out.string()}}
                   .dump()
            << "\n"
            << FormatStatsTable(corpus.stats, options.split);
  return 0;
}

int Stats(const std::string &corpus_path, const std::string &split, bool as_json) {
  const fs::path path = CorpusPathFor(corpus_path, split);
  const Corpus corpus = ReadCorpus(path);
  if (as_json) {
    std::cout << json{{"corpus_hash", corpus.content_hash},
                      {"split", corpus.options.split},
                      {"stats", json::parse(StatsToJson(corpus.stats))}}
                     .dump()
              << "\n";
  } else {
    std::cout << HeaderLine("stats", {{"corpus", path.string()}}, corpus.content_hash) << "\n"
              << FormatStatsTable(corpus.stats, corpus.options.split);
  }
  return 0;
}

int Run(const RunFlags &flags, size_t threads, bool as_json) {
  RunConfig run = flags.Resolve();
  const fs::path path = CorpusPathFor(run.corpus, run.split);
  run.corpus = path.string();
  const Corpus corpus = ReadCorpus(path);
  const AgentFactory factory = MakeAgentFactory(run.agent, corpus.vocabulary);
  const std::vector<GamePtr> games = SelectGames(corpus, run);
  const Evaluation eval =
      Evaluate(factory, games, run.env, run.seed, corpus.vocabulary, threads == 0 ? 1 : threads);
  const json run_json = RunConfigToJson(run);
  if (!run.out.empty()) {
    TrajectoryLogWriter writer(run.out, TrajectoryLogHeader(run_json, corpus.content_hash));
    for (const EpisodeResult &episode : eval.episodes) writer.Append(MakeTrajectory(episode, run.agent));
    writer.Close();
  }
  if (as_json) {
    std::cout << json{{"engine_version", kEngineVersion},
                      {"corpus_hash", corpus.content_hash},
                      {"run", run_json},
                      {"report", json::parse(ReportToJson(eval.report))}}
                     .dump()
              << "\n";
  } else {
    const std::string label = run.agent + " " + std::string(ModeName(run.env.mode)) + " " +
                              std::string(QueryTypeName(run.env.query_type)) + " mem=" +
                              std::to_string(run.env.memory_slots);
    const std::vector<std::pair<std::string, MetricReport>> rows = {{label, eval.report}};
    std::cout << HeaderLine("run", run_json, corpus.content_hash) << "\n" << FormatReportTable(rows);
  }
  return 0;
}

int Replay(const std::string &log_path, const std::string &corpus_path, const std::string &split) {
  const TrajectoryLog log = ReadTrajectoryLog(log_path);
  std::string resolved = corpus_path;
  if (resolved.empty() && log.header.contains("run") && log.header["run"].is_object()) {
    resolved = log.header["run"].value("corpus", "");
  }
  const fs::path path = CorpusPathFor(resolved, split);
  const Corpus corpus = ReadCorpus(path);
  const std::string expected = log.header.value("corpus_hash", "");
  if (!expected.empty() && expected != corpus.content_hash) {
    std::cerr << "warning: log was written against corpus " << expected << ", replaying on "
              << corpus.content_hash << "\n";
  }
  const ReplayReport report = imrc::Replay(log, corpus);
  std::cout << HeaderLine("replay", {{"log", log_path}, {"corpus", path.string()}}, corpus.content_hash)
            << "\n"
            << report.Summary() << "\n";
  return report.ok() ? 0 : kExitDivergence;
}

// Predictions are either a JSON object {game_id: text} or JSON lines
// {"game_id", "prediction", optional "sufficient_info", optional "steps"}.
int Score(const std::string &predictions_path, const std::string &corpus_path,
          const std::string &split, bool as_json) {
  const fs::path path = CorpusPathFor(corpus_path, split);
  const Corpus corpus = ReadCorpus(path);
  const std::string text = ReadFileToString(predictions_path);
  struct Row {
    std::string id, prediction;
    std::optional<bool> sufficient;
    size_t steps = 0;
  };
  std::vector<Row> rows;
  try {
    const json whole = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (whole.is_object()) {
      for (const auto &[id, value] : whole.items()) rows.push_back({id, value.get<std::string>(), {}, 0});
    } else {
      size_t start = 0, line_number = 0;
      while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record;
        try {
          record = json::parse(line);
        } catch (const json::exception &e) {
          throw Error(ErrorCode::kParseError,
                      predictions_path + " line " + std::to_string(line_number) + ": " + e.what());
        }
        Row row{record.at("game_id").get<std::string>(), record.at("prediction").get<std::string>(), {}, 0};
        if (record.contains("sufficient_info")) row.sufficient = record["sufficient_info"].get<bool>();
        row.steps = record.value("steps", size_t{0});
        rows.push_back(std::move(row));
      }
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kSchemaError, predictions_path + ": " + e.what());
  }
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, predictions_path + ": no predictions");
  std::vector<ScoredEpisode> episodes;
  json per_game = json::array();
  for (const Row &row : rows) {
    const GamePtr *game = corpus.Find(row.id);
    if (game == nullptr) throw Error(ErrorCode::kInvalidArgument, "unknown game '" + row.id + "'");
    std::vector<std::string> truths;
    for (const Answer &answer : (*game)->answers) truths.push_back(answer.text);
    const double f1 = MaxF1(row.prediction, truths);
    episodes.push_back({f1, row.sufficient.value_or(false), row.steps, false});
    per_game.push_back({{"game_id", row.id}, {"f1", f1}});
  }
  const MetricReport report = Aggregate(episodes);
  const json header{{"predictions", predictions_path},
                    {"sha256", Sha256Hex(text)},
                    {"corpus", path.string()}};
  if (as_json) {
    std::cout << json{{"engine_version", kEngineVersion},
                      {"corpus_hash", corpus.content_hash},
                      {"run", header},
                      {"report", json::parse(ReportToJson(report))},
                      {"episodes", per_game}}
                     .dump()
              << "\n";
  } else {
    const std::vector<std::pair<std::string, MetricReport>> table = {
        {fs::path(predictions_path).filename().string(), report}};
    std::cout << HeaderLine("score", header, corpus.content_hash) << "\n" << FormatReportTable(table);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeFlags {
  std::vector<std::string> corpora;
  bool stdio = false;
  std::string tcp;
  std::string log_dir;
};

int Serve(const ServeFlags &flags) {
  std::vector<fs::path> paths(flags.corpora.begin(), flags.corpora.end());
  if (paths.empty()) {
    const char *dir = std::getenv("IMRC_CORPUS_DIR");
    if (dir == nullptr) throw Error(ErrorCode::kInvalidArgument, "pass --corpus or set IMRC_CORPUS_DIR");
    for (const auto &entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".ndjson") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
  }
  std::map<std::string, std::shared_ptr<const Corpus>> corpora;
  for (const fs::path &path : paths) {
    auto corpus = std::make_shared<Corpus>(ReadCorpus(path));
    const std::string split = corpus->options.split;
    if (!corpora.emplace(split, std::move(corpus)).second) {
      throw Error(ErrorCode::kInvalidArgument, "two corpora for split '" + split + "'");
    }
  }
  ServerOptions options;
  if (!flags.log_dir.empty()) options.log_dir = flags.log_dir;
  Server server(std::move(corpora), options);
  InstallSignalHandlers();
  if (!flags.tcp.empty()) {
    const size_t colon = flags.tcp.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--tcp expects host:port");
    const std::string host = flags.tcp.substr(0, colon);
    int port = 0;
    try {
      port = std::stoi(flags.tcp.substr(colon + 1));
    } catch (const std::exception &) {
      port = -1;
    }
    if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "bad port in --tcp");
    ServeTcp(server, host, static_cast<uint16_t>(port), g_stop, [&](uint16_t bound) {
      std::cerr << "listening on " << host << ":" << bound << std::endl;
    });
  } else {
    ServeFileDescriptors(server, STDIN_FILENO, STDOUT_FILENO, g_stop);
  }
  server.Shutdown();
  return 0;
}

// ---------------------------------------------------------------------------

void PrintObservation(const Observation &observation, size_t max_steps) {
  std::cout << "[step " << observation.step_index << "/" << max_steps << "] "
            << observation.Text() << "\n";
}

std::string LegalKinds(const Observation &observation) {
  std::string out;
  for (ActionKind kind : observation.legal_actions) {
    if (!out.empty()) out += ", ";
    out += ActionKindName(kind);
  }
  return out;
}

int Play(const RunFlags &flags, const std::string &game_id) {
  RunConfig run = flags.Resolve();
  run.agent = "human";
  const fs::path path = CorpusPathFor(run.corpus, run.split);
  run.corpus = path.string();
  const Corpus corpus = ReadCorpus(path);
  GamePtr game;
  if (!game_id.empty()) {
    const GamePtr *found = corpus.Find(game_id);
    if (found == nullptr) throw Error(ErrorCode::kInvalidArgument, "unknown game '" + game_id + "'");
    game = *found;
  } else {
    std::mt19937_64 rng(run.seed);
    game = corpus.games[rng() % corpus.games.size()];
  }
  TrajectoryLogWriter log;
  if (!run.out.empty()) {
    log = TrajectoryLogWriter(run.out, TrajectoryLogHeader(RunConfigToJson(run), corpus.content_hash));
  }
  auto [state, observation] = Reset(game, run.env, run.seed, corpus.vocabulary);
  std::cout << "game " << game->game_id << " (" << ModeName(run.env.mode) << ", "
            << QueryTypeName(run.env.query_type) << ", memory " << run.env.memory_slots << ")\n"
            << "question: " << game->question << "\n"
            << "commands: previous, next, ctrlf <token>, stop, queries, help, quit\n";
  PrintObservation(observation, run.env.max_steps);
  std::string line;
  const auto abort_episode = [&] {
    if (!log.is_open()) return;
    Trajectory trajectory;
    trajectory.game_id = game->game_id;
    trajectory.agent = run.agent;
    trajectory.config = run.env;
    trajectory.seed = run.seed;
    trajectory.initial_digest = state.initial_digest();
    trajectory.steps = state.history();
    trajectory.step_count = state.step_count();
    trajectory.aborted = true;
    log.Append(trajectory);
    log.Close();
    std::cout << "episode aborted; trajectory written to " << run.out << "\n";
  };
  while (!state.done()) {
    std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) {
      abort_episode();
      return 0;
    }
    std::istringstream words(line);
    std::string command, query;
    words >> command >> query;
    if (command.empty()) continue;
    if (command == "quit" || command == "exit") {
      abort_episode();
      return 0;
    }
    if (command == "help") {
      std::cout << "legal commands now: " << LegalKinds(observation) << "\n";
      continue;
    }
    if (command == "queries") {
      const QuerySet &queries = observation.legal_queries;
      if (queries.is_vocabulary()) {
        std::cout << queries.size() << " vocabulary tokens (any corpus word)\n";
      } else {
        for (const std::string &token : queries.tokens()) std::cout << token << " ";
        std::cout << "\n";
      }
      continue;
    }
    const std::optional<ActionKind> kind = ParseActionKind(command);
    if (!kind) {
      std::cout << "unknown command '" << command << "'; legal: " << LegalKinds(observation) << "\n";
      continue;
    }
    Action action{*kind, *kind == ActionKind::kCtrlf ? NormalizeToken(query) : ""};
    if (*kind == ActionKind::kCtrlf && query.empty()) {
      std::cout << "ctrlf needs one token, e.g. 'ctrlf harvard'\n";
      continue;
    }
    try {
      const StepOutcome outcome = Step(state, action);
      observation = outcome.observation;
      if (outcome.info.query_found == std::optional<bool>(false)) {
        std::cout << "'" << action.query << "' not found; cursor unchanged\n";
      }
      if (outcome.info.forced_stop) std::cout << "step budget used up\n";
      PrintObservation(observation, run.env.max_steps);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kMaskViolation) throw;
      if (!observation.IsLegal(*kind)) {
        std::cout << command << " is masked in " << ModeName(run.env.mode)
                  << " mode; legal: " << LegalKinds(observation) << "\n";
      } else {
        std::cout << "'" << action.query << "' is not a legal " << QueryTypeName(run.env.query_type)
                  << " query; type 'queries' to list them\n";
      }
    }
  }
  std::cout << "answer> " << std::flush;
  std::string answer;
  if (!std::getline(std::cin, answer)) answer.clear();
  const EpisodeResult result = Finalize(state, answer);
  char score[96];
  std::snprintf(score, sizeof(score), "F1 %.3f, reward %.3f", result.f1, result.reward);
  std::cout << "\n" << score
            << (result.sufficient_info ? " (answer was in view)" : " (answer not in view)") << "\n"
            << "ground truth: ";
  for (size_t i = 0; i < game->answers.size(); ++i) {
    std::cout << (i ? " | " : "") << game->answers[i].text;
  }
  std::cout << "\n";
  if (log.is_open()) {
    log.Append(MakeTrajectory(result, run.agent));
    log.Close();
  }
  return 0;
}

// ---------------------------------------------------------------------------

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kIoError:
    case ErrorCode::kBadRequest:
      return kExitInput;
    case ErrorCode::kMaskViolation:
    case ErrorCode::kLifecycle:
    case ErrorCode::kNoSession:
      return kExitRuntime;
  }
  return kExitRuntime;
}

int Main(int argc, char **argv) {
  CLI::App app{"Interactive machine reading comprehension engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kEngineVersion));

  ConvertFlags convert;
  CLI::App *convert_cmd = app.add_subcommand("convert", "Turn a SQuAD-format file into a corpus");
  convert_cmd->add_option("input", convert.input, "SQuAD v1.1 JSON file")->required();
  convert_cmd->add_option("--out", convert.out, "corpus path (default: $IMRC_CORPUS_DIR/<split>.ndjson)");
  convert_cmd->add_option("--split", convert.options.split, "split name recorded in the corpus");
  convert_cmd->add_option("--vocab-cap", convert.options.vocabulary_cap, "vocabulary size cap");
  convert_cmd->add_option("--first-article", convert.options.first_article, "skip this many articles");
  convert_cmd->add_option("--article-count", convert.article_count, "keep this many articles");

  std::string stats_corpus, stats_split = "train";
  bool stats_json = false;
  CLI::App *stats_cmd = app.add_subcommand("stats", "Print corpus statistics");
  stats_cmd->add_option("corpus", stats_corpus, "corpus file");
  stats_cmd->add_option("--split", stats_split, "split name under $IMRC_CORPUS_DIR");
  stats_cmd->add_flag("--json", stats_json, "machine-readable output");

  RunFlags run_flags;
  size_t threads = std::max(1u, std::thread::hardware_concurrency());
  bool run_json = false;
  CLI::App *run_cmd = app.add_subcommand("run", "Evaluate a scripted agent");
  run_flags.Register(*run_cmd, /*with_agent=*/true);
  run_cmd->add_option("--threads", threads, "worker threads (results do not depend on it)");
  run_cmd->add_flag("--json", run_json, "machine-readable report");

  RunFlags play_flags;
  std::string play_game;
  CLI::App *play_cmd = app.add_subcommand("play", "Play one game in the terminal");
  play_flags.Register(*play_cmd, /*with_agent=*/false);
  play_cmd->add_option("--game-id", play_game, "game to play (default: drawn with --seed)");

  ServeFlags serve;
  CLI::App *serve_cmd = app.add_subcommand("serve", "Serve the line protocol");
  serve_cmd->add_option("--corpus", serve.corpora, "corpus file, repeatable; keyed by its split");
  auto *stdio_flag = serve_cmd->add_flag("--stdio", serve.stdio, "serve on stdin/stdout (default)");
  serve_cmd->add_option("--tcp", serve.tcp, "serve on host:port")->excludes(stdio_flag);
  serve_cmd->add_option("--log-dir", serve.log_dir, "write per-session trajectory logs here");

  std::string replay_log, replay_corpus, replay_split = "train";
  CLI::App *replay_cmd = app.add_subcommand("replay", "Re-execute a trajectory log and verify it");
  replay_cmd->add_option("log", replay_log, "trajectory log")->required();
  replay_cmd->add_option("--corpus", replay_corpus, "corpus file (default: from the log header)");
  replay_cmd->add_option("--split", replay_split, "split name under $IMRC_CORPUS_DIR");

  std::string score_predictions, score_corpus, score_split = "train";
  bool score_json = false;
  CLI::App *score_cmd = app.add_subcommand("score", "Score a predictions file");
  score_cmd->add_option("predictions", score_predictions, "predictions file")->required();
  score_cmd->add_option("--corpus", score_corpus, "corpus file");
  score_cmd->add_option("--split", score_split, "split name under $IMRC_CORPUS_DIR");
  score_cmd->add_flag("--json", score_json, "machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*convert_cmd) return Convert(convert);
    if (*stats_cmd) return Stats(stats_corpus, stats_split, stats_json);
    if (*run_cmd) return Run(run_flags, threads, run_json);
    if (*play_cmd) return Play(play_flags, play_game);
    if (*serve_cmd) return Serve(serve);
    if (*replay_cmd) return Replay(replay_log, replay_corpus, replay_split);
    if (*score_cmd) return Score(score_predictions, score_corpus, score_split, score_json);
  } catch (const Error &e) {
    std::cerr << "imrc: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const fs::filesystem_error &e) {
    std::cerr << "imrc: io_error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception &e) {
    std::cerr << "imrc: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace
}  // namespace imrc

int main(int argc, char **argv) { return imrc::Main(argc, argv); }
