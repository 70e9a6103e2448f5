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

#include "support/wire_client.h"

#include <stdexcept>

namespace imrc::testing {

using nlohmann::json;

WireClient::WireClient(json config, uint64_t seed, size_t episodes)
    : config_(std::move(config)), rng_(seed), episodes_left_(episodes) {}

std::optional<std::string> WireClient::NextRequest() {
  if (awaiting_) throw std::logic_error("request already in flight");
  json request{{"seq", ++seq_}};
  if (!session_id_.empty()) request["session_id"] = session_id_;
  switch (state_) {
    case State::kCreate:
      request["type"] = "create_session";
      request["payload"] = {{"config", config_}, {"seed", rng_() % 1000}};
      break;
    case State::kReset:
      request["type"] = "reset";
      break;
    case State::kStep: {
      const auto &kinds = observation_["legal_actions"];
      const std::string kind = kinds[rng_() % kinds.size()];
      json action{{"kind", kind}};
      if (kind == "ctrlf") {
        if (observation_.contains("legal_query_tokens")) {
          const auto &tokens = observation_["legal_query_tokens"];
          action["query"] = tokens[rng_() % tokens.size()];
        } else {
          action["query"] = vocabulary_[rng_() % vocabulary_.size()];
        }
      }
      request["type"] = "step";
      request["payload"] = {{"action", action}};
      break;
    }
    case State::kFinalize: {
      std::string text;
      for (const auto &token : observation_["observation_tokens"]) {
        if (!text.empty()) text += ' ';
        text += token.get<std::string>();
      }
      request["type"] = "finalize";
      request["payload"] = {{"prediction", {{"text", text}}}};
      break;
    }
    case State::kClose:
      request["type"] = "close";
      break;
    case State::kFinished:
      return std::nullopt;
  }
  awaiting_ = true;
  return request.dump();
}

void WireClient::Receive(const std::string &line) {
  awaiting_ = false;
  transcript_.push_back(line);
  const json response = json::parse(line);
  if (response.contains("error")) throw std::runtime_error("server error: " + line);
  const json &payload = response["payload"];
  switch (state_) {
    case State::kCreate:
      session_id_ = response["session_id"];
      if (payload.contains("vocabulary")) vocabulary_ = payload["vocabulary"]["tokens"];
      state_ = episodes_left_ > 0 ? State::kReset : State::kClose;
      break;
    case State::kReset:
      observation_ = payload["observation"];
      state_ = observation_["done"].get<bool>() ? State::kFinalize : State::kStep;
      break;
    case State::kStep:
      observation_ = payload["observation"];
      if (payload["done"].get<bool>()) state_ = State::kFinalize;
      break;
    case State::kFinalize:
      f1s_.push_back(payload["f1"]);
      state_ = --episodes_left_ > 0 ? State::kReset : State::kClose;
      break;
    case State::kClose:
      state_ = State::kFinished;
      break;
    case State::kFinished:
      break;
  }
}

}  // namespace imrc::testing
