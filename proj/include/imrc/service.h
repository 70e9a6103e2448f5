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

#ifndef IMRC_SERVICE_H_
#define IMRC_SERVICE_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "imrc/corpus.h"
#include "imrc/env.h"
#include "json.hpp"

namespace imrc {

inline constexpr int kProtocolVersion = 1;

nlohmann::json ObservationToJson(const Observation &observation);

struct ServerOptions {
  // Per-session trajectory logs are written here when set.
  std::optional<std::filesystem::path> log_dir;
};

// Newline-delimited JSON protocol. Requests are
//   {"seq": N, "type": T, "session_id": S, "payload": {...}}
// and every response echoes seq with either a payload or
//   "error": {"code": ..., "message": ...}.
// Sessions are isolated; requests on one session are handled one at a time.
class Server {
 public:
  // `corpora` maps split names to loaded corpora.
  Server(std::map<std::string, std::shared_ptr<const Corpus>> corpora,
         ServerOptions options = {});
  ~Server();

  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  // One request line in, one response line out (no trailing newline).
  std::string HandleLine(std::string_view line);
  nlohmann::json Handle(const nlohmann::json &request);

  nlohmann::json Capabilities() const;
  size_t session_count() const;

  // Logs live episodes as aborted and flushes every session log.
  void Shutdown();

 private:
  struct Session;

  nlohmann::json HandleCreateSession(const nlohmann::json &payload);
  std::shared_ptr<Session> FindSession(const std::string &id) const;

  std::map<std::string, std::shared_ptr<const Corpus>> corpora_;
  ServerOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  uint64_t next_session_ = 1;
};

// Serves requests from `input_fd` until end of input or until `stop` is set,
// writing responses to `output_fd`.
void ServeFileDescriptors(Server &server, int input_fd, int output_fd,
                          const std::atomic<bool> &stop);

// Accepts TCP connections on host:port (port 0 picks one; `on_listening`
// receives the bound port) until `stop` is set. Each connection gets its own
// thread.
void ServeTcp(Server &server, const std::string &host, uint16_t port,
              const std::atomic<bool> &stop,
              const std::function<void(uint16_t)> &on_listening = {});

}  // namespace imrc

#endif  // IMRC_SERVICE_H_
