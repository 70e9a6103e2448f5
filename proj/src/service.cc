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

#include "imrc/service.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <random>
#include <thread>
#include <vector>

#include "imrc/agents.h"
#include "imrc/status.h"
#include "imrc/trajectory.h"

namespace imrc {

using nlohmann::json;

struct Server::Session {
  std::mutex mutex;
  std::string id;
  std::string split;
  std::shared_ptr<const Corpus> corpus;
  EnvConfig config;
  uint64_t seed = 0;
  std::vector<size_t> order;
  size_t next_game = 0;
  size_t episodes = 0;
  std::optional<int64_t> last_seq;
  std::optional<EnvState> live;
  TrajectoryLogWriter log;

  void LogAborted() {
    if (!live || !log.is_open()) return;
    Trajectory trajectory;
    trajectory.game_id = live->game().game_id;
    trajectory.agent = "remote";
    trajectory.config = live->config();
    trajectory.seed = live->seed();
    trajectory.initial_digest = live->initial_digest();
    trajectory.steps = live->history();
    trajectory.step_count = live->step_count();
    trajectory.forced_stop = live->forced_stop();
    trajectory.aborted = true;
    log.Append(trajectory);
    log.Flush();
  }
};

namespace {

[[noreturn]] void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

json ErrorResponse(const json &seq, const json &session_id, ErrorCode code,
                   const std::string &message) {
  json response{{"seq", seq},
                {"type", "error"},
                {"error", {{"code", ErrorCodeName(code)}, {"message", message}}}};
  if (!session_id.is_null()) response["session_id"] = session_id;
  return response;
}

const json &PayloadOf(const json &request) {
  static const json kEmpty = json::object();
  auto it = request.find("payload");
  if (it == request.end() || it->is_null()) return kEmpty;
  if (!it->is_object()) Fail(ErrorCode::kBadRequest, "payload must be an object");
  return *it;
}

json ResultToJson(const EpisodeResult &result, const GameSpec &game) {
  json answers = json::array();
  for (const Answer &answer : game.answers) answers.push_back(answer.text);
  return json{{"game_id", result.game_id},
              {"prediction", result.prediction},
              {"f1", result.f1},
              {"reward", result.reward},
              {"sufficient_info", result.sufficient_info},
              {"forced_stop", result.forced_stop},
              {"steps", result.steps},
              {"answers", std::move(answers)}};
}

}  // namespace

json ObservationToJson(const Observation &observation) {
  json actions = json::array();
  for (ActionKind kind : observation.legal_actions) actions.push_back(ActionKindName(kind));
  json out{{"question_tokens", observation.question_tokens},
           {"observation_tokens", observation.observation_tokens},
           {"step_index", observation.step_index},
           {"legal_actions", std::move(actions)},
           {"done", observation.done}};
  if (observation.legal_queries.is_vocabulary()) {
    out["legal_query_source"] = "vocab";
    out["vocab_size"] = observation.legal_queries.size();
    out["vocab_hash"] = observation.legal_queries.vocabulary()->Hash();
  } else {
    out["legal_query_tokens"] = observation.legal_queries.tokens();
  }
  return out;
}

Server::Server(std::map<std::string, std::shared_ptr<const Corpus>> corpora,
               ServerOptions options)
    : corpora_(std::move(corpora)), options_(std::move(options)) {
  if (corpora_.empty()) Fail(ErrorCode::kInvalidArgument, "server needs at least one corpus");
  if (options_.log_dir) std::filesystem::create_directories(*options_.log_dir);
}

Server::~Server() { Shutdown(); }

json Server::Capabilities() const {
  json modes = json::array();
  for (Mode mode : kAllModes) modes.push_back(ModeName(mode));
  json query_types = json::array();
  for (QueryType type : kAllQueryTypes) query_types.push_back(QueryTypeName(type));
  json action_kinds = json::array();
  for (ActionKind kind : kAllActionKinds) action_kinds.push_back(ActionKindName(kind));
  json splits = json::array();
  for (const auto &[name, corpus] : corpora_) splits.push_back(name);
  json error_codes = json::array();
  for (ErrorCode code : {ErrorCode::kParseError, ErrorCode::kSchemaError,
                         ErrorCode::kInvalidArgument, ErrorCode::kMaskViolation,
                         ErrorCode::kLifecycle, ErrorCode::kNoSession,
                         ErrorCode::kVersionMismatch, ErrorCode::kIoError,
                         ErrorCode::kBadRequest}) {
    error_codes.push_back(ErrorCodeName(code));
  }
  const EnvConfig defaults;
  return json{{"protocol_version", kProtocolVersion},
              {"engine_version", kEngineVersion},
              {"modes", std::move(modes)},
              {"query_types", std::move(query_types)},
              {"action_kinds", std::move(action_kinds)},
              {"memory_sizes", kStandardMemorySizes},
              {"max_steps_default", defaults.max_steps},
              {"reward_value_default", defaults.reward_value},
              {"discount_gamma_default", defaults.discount_gamma},
              {"splits", std::move(splits)},
              {"error_codes", std::move(error_codes)}};
}

size_t Server::session_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return sessions_.size();
}

std::shared_ptr<Server::Session> Server::FindSession(const std::string &id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) Fail(ErrorCode::kNoSession, "unknown session '" + id + "'");
  return it->second;
}

json Server::HandleCreateSession(const json &payload) {
  auto session = std::make_shared<Session>();
  session->config = ConfigFromJson(payload.value("config", json::object()));
  try {
    session->config.Validate();
  } catch (const Error &e) {
    Fail(ErrorCode::kInvalidArgument, e.what());
  }
  session->split = payload.value("split", corpora_.begin()->first);
  auto corpus = corpora_.find(session->split);
  if (corpus == corpora_.end()) {
    Fail(ErrorCode::kInvalidArgument, "unknown split '" + session->split + "'");
  }
  session->corpus = corpus->second;
  if (session->corpus->games.empty()) {
    Fail(ErrorCode::kInvalidArgument, "split '" + session->split + "' has no games");
  }
  try {
    session->seed = payload.value("seed", uint64_t{0});
  } catch (const json::exception &) {
    Fail(ErrorCode::kBadRequest, "seed must be a non-negative integer");
  }
  session->order.resize(session->corpus->games.size());
  for (size_t i = 0; i < session->order.size(); ++i) session->order[i] = i;
  std::mt19937_64 rng(session->seed);
  for (size_t i = session->order.size(); i > 1; --i) {
    std::swap(session->order[i - 1], session->order[rng() % i]);
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    session->id = "s" + std::to_string(next_session_++);
    sessions_[session->id] = session;
  }
  if (options_.log_dir) {
    json run{{"session_id", session->id},
             {"split", session->split},
             {"seed", session->seed},
             {"config", ConfigToJson(session->config)},
             {"agent", "remote"}};
    session->log = TrajectoryLogWriter(*options_.log_dir / ("session-" + session->id + ".ndjson"),
                                       TrajectoryLogHeader(run, session->corpus->content_hash));
    session->log.Flush();
  }
  json out{{"session_id", session->id},
           {"type", "session"},
           {"payload",
            {{"config", ConfigToJson(session->config)},
             {"split", session->split},
             {"seed", session->seed},
             {"game_count", session->corpus->games.size()}}}};
  if (session->config.query_type == QueryType::kVocabulary) {
    const Vocabulary &vocab = *session->corpus->vocabulary;
    out["payload"]["vocabulary"] = {{"tokens", vocab.tokens()}, {"hash", vocab.Hash()}};
  }
  return out;
}

json Server::Handle(const json &request) {
  json seq = nullptr;
  json session_id = nullptr;
  try {
    if (!request.is_object()) Fail(ErrorCode::kBadRequest, "request must be a JSON object");
    if (auto it = request.find("seq"); it != request.end()) seq = *it;
    if (auto it = request.find("session_id"); it != request.end()) session_id = *it;
    if (!seq.is_number_integer()) Fail(ErrorCode::kBadRequest, "seq must be an integer");
    auto type_it = request.find("type");
    if (type_it == request.end() || !type_it->is_string()) {
      Fail(ErrorCode::kBadRequest, "missing request type");
    }
    const std::string type = type_it->get<std::string>();
    const json &payload = PayloadOf(request);

    if (type == "hello") {
      return json{{"seq", seq}, {"type", "capabilities"}, {"payload", Capabilities()}};
    }
    if (type == "create_session") {
      json response = HandleCreateSession(payload);
      response["seq"] = seq;
      return response;
    }
    if (!session_id.is_string()) Fail(ErrorCode::kNoSession, "missing session_id");
    std::shared_ptr<Session> session = FindSession(session_id.get<std::string>());
    std::lock_guard<std::mutex> lock(session->mutex);
    const int64_t number = seq.get<int64_t>();
    if (session->last_seq && number <= *session->last_seq) {
      Fail(ErrorCode::kBadRequest, "seq " + std::to_string(number) +
                                       " does not increase past " +
                                       std::to_string(*session->last_seq));
    }
    session->last_seq = number;
    json response{{"seq", seq}, {"session_id", session_id}};

    if (type == "reset") {
      const Corpus &corpus = *session->corpus;
      GamePtr game;
      if (auto it = payload.find("game_id"); it != payload.end() && !it->is_null()) {
        if (!it->is_string()) Fail(ErrorCode::kBadRequest, "game_id must be a string");
        const GamePtr *found = corpus.Find(it->get<std::string>());
        if (found == nullptr) {
          Fail(ErrorCode::kInvalidArgument, "unknown game '" + it->get<std::string>() + "'");
        }
        game = *found;
      } else {
        game = corpus.games[session->order[session->next_game]];
        session->next_game = (session->next_game + 1) % session->order.size();
      }
      uint64_t seed = EpisodeSeed(session->seed, session->episodes);
      if (auto it = payload.find("seed"); it != payload.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) Fail(ErrorCode::kBadRequest, "seed must be unsigned");
        seed = it->get<uint64_t>();
      }
      auto [state, observation] = Reset(game, session->config, seed, corpus.vocabulary);
      session->LogAborted();
      session->live.emplace(std::move(state));
      ++session->episodes;
      response["type"] = "observation";
      response["payload"] = {{"game_id", game->game_id},
                             {"seed", seed},
                             {"observation", ObservationToJson(observation)}};
      return response;
    }
    if (type == "step") {
      if (!session->live) Fail(ErrorCode::kLifecycle, "step before reset");
      auto action_it = payload.find("action");
      if (action_it == payload.end()) Fail(ErrorCode::kBadRequest, "step needs an action");
      const Action action = ActionFromJson(*action_it);
      StepOutcome outcome = Step(*session->live, action);
      response["type"] = "outcome";
      response["payload"] = {{"observation", ObservationToJson(outcome.observation)},
                             {"reward", outcome.reward},
                             {"done", outcome.done},
                             {"info", StepInfoToJson(outcome.info)}};
      return response;
    }
    if (type == "finalize") {
      if (!session->live) Fail(ErrorCode::kLifecycle, "finalize before reset");
      if (!session->live->done()) {
        Fail(ErrorCode::kLifecycle, "finalize before the episode terminated");
      }
      auto it = payload.find("prediction");
      if (it == payload.end() || !it->is_object()) {
        Fail(ErrorCode::kBadRequest, "finalize needs a prediction object");
      }
      Prediction prediction;
      if (it->contains("text")) {
        if (!(*it)["text"].is_string()) Fail(ErrorCode::kBadRequest, "text must be a string");
        prediction = (*it)["text"].get<std::string>();
      } else {
        const json &head = it->value("head", json(nullptr));
        const json &tail = it->value("tail", json(nullptr));
        if (!head.is_number_unsigned() || !tail.is_number_unsigned()) {
          Fail(ErrorCode::kBadRequest, "prediction needs text or unsigned head/tail");
        }
        prediction = TokenSpan{head.get<size_t>(), tail.get<size_t>()};
      }
      EpisodeResult result = Finalize(*session->live, prediction);
      if (session->log.is_open()) {
        session->log.Append(MakeTrajectory(result, "remote"));
        session->log.Flush();
      }
      response["type"] = "result";
      response["payload"] = ResultToJson(result, session->live->game());
      session->live.reset();
      return response;
    }
    if (type == "close") {
      session->LogAborted();
      session->live.reset();
      session->log.Close();
      {
        std::lock_guard<std::mutex> sessions_lock(mutex_);
        sessions_.erase(session->id);
      }
      response["type"] = "closed";
      response["payload"] = json::object();
      return response;
    }
    Fail(ErrorCode::kBadRequest, "unknown request type '" + type + "'");
  } catch (const Error &e) {
    return ErrorResponse(seq, session_id, e.code(), e.what());
  } catch (const json::exception &e) {
    return ErrorResponse(seq, session_id, ErrorCode::kBadRequest, e.what());
  }
}

std::string Server::HandleLine(std::string_view line) {
  json request;
  try {
    request = json::parse(line.begin(), line.end());
  } catch (const json::parse_error &e) {
    return ErrorResponse(nullptr, nullptr, ErrorCode::kParseError,
                         "malformed JSON at byte " + std::to_string(e.byte))
        .dump();
  } catch (const json::exception &e) {
    // Well-formed but unrepresentable, e.g. a number literal that overflows.
    return ErrorResponse(nullptr, nullptr, ErrorCode::kParseError, e.what()).dump();
  }
  return Handle(request).dump(-1, ' ', false, json::error_handler_t::replace);
}

void Server::Shutdown() {
  std::map<std::string, std::shared_ptr<Session>> sessions;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    sessions.swap(sessions_);
  }
  for (auto &[id, session] : sessions) {
    std::lock_guard<std::mutex> lock(session->mutex);
    session->LogAborted();
    session->live.reset();
    session->log.Close();
  }
}

namespace {

bool WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t written = ::write(fd, data.data(), data.size());
    if (written < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<size_t>(written));
  }
  return true;
}

}  // namespace

void ServeFileDescriptors(Server &server, int input_fd, int output_fd,
                          const std::atomic<bool> &stop) {
  std::string buffer;
  char chunk[65536];
  while (!stop.load()) {
    pollfd descriptor{input_fd, POLLIN, 0};
    const int ready = ::poll(&descriptor, 1, 100);
    if (ready < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (ready == 0) continue;
    const ssize_t count = ::read(input_fd, chunk, sizeof(chunk));
    if (count < 0) {
      if (errno == EINTR) continue;
      return;
    }
    if (count == 0) break;
    buffer.append(chunk, static_cast<size_t>(count));
    size_t start = 0;
    for (size_t newline = buffer.find('\n'); newline != std::string::npos;
         newline = buffer.find('\n', start)) {
      std::string_view line(buffer.data() + start, newline - start);
      start = newline + 1;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      if (!WriteAll(output_fd, server.HandleLine(line) + "\n")) return;
    }
    buffer.erase(0, start);
  }
  if (!buffer.empty() && !stop.load()) {
    WriteAll(output_fd, server.HandleLine(buffer) + "\n");
  }
}

void ServeTcp(Server &server, const std::string &host, uint16_t port,
              const std::atomic<bool> &stop,
              const std::function<void(uint16_t)> &on_listening) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo *resolved = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints,
                    &resolved) != 0) {
    Fail(ErrorCode::kIoError, "cannot resolve " + host);
  }
  const int listener = ::socket(resolved->ai_family, resolved->ai_socktype, 0);
  if (listener < 0) {
    ::freeaddrinfo(resolved);
    Fail(ErrorCode::kIoError, "cannot create socket");
  }
  const int enable = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &enable, sizeof(enable));
  const bool bound = ::bind(listener, resolved->ai_addr, resolved->ai_addrlen) == 0;
  ::freeaddrinfo(resolved);
  if (!bound || ::listen(listener, 64) != 0) {
    ::close(listener);
    Fail(ErrorCode::kIoError, "cannot listen on " + host + ":" + service);
  }
  sockaddr_in address{};
  socklen_t length = sizeof(address);
  ::getsockname(listener, reinterpret_cast<sockaddr *>(&address), &length);
  if (on_listening) on_listening(ntohs(address.sin_port));

  std::vector<std::thread> connections;
  std::vector<int> sockets;
  while (!stop.load()) {
    pollfd descriptor{listener, POLLIN, 0};
    const int ready = ::poll(&descriptor, 1, 100);
    if (ready <= 0) continue;
    const int client = ::accept(listener, nullptr, nullptr);
    if (client < 0) continue;
    sockets.push_back(client);
    connections.emplace_back([&server, client, &stop] {
      ServeFileDescriptors(server, client, client, stop);
      ::shutdown(client, SHUT_RDWR);
    });
  }
  ::close(listener);
  for (std::thread &connection : connections) connection.join();
  for (int client : sockets) ::close(client);
}

}  // namespace imrc
