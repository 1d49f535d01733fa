// Copyright 2026 The feesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEESIM_GATEWAY_HPP_
#define FEESIM_GATEWAY_HPP_

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "feesim/agents.hpp"
#include "feesim/prompt.hpp"

namespace feesim {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = kDefaultTemperature;
  std::optional<int> max_tokens;
};

// OpenAI-compatible chat-completion body.
nlohmann::json to_wire(const ChatRequest& request);
// Content of choices[0].message.content; throws TransportError on a
// malformed envelope.
std::string content_from_wire(const nlohmann::json& response);

class TransportError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  // Returns the assistant message text. Throws TransportError/TimeoutError.
  virtual std::string complete(const ChatRequest& request) = 0;
};

class HttpChatTransport final : public ChatTransport {
 public:
  // Empty api_key sends no Authorization header.
  HttpChatTransport(std::string endpoint, std::string api_key,
                    std::chrono::milliseconds timeout);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_;
  std::chrono::milliseconds timeout_;
};

class GatewayError : public Error {
 public:
  enum class Kind { kTransport, kTimeout, kInvalidReply };
  GatewayError(Kind kind, int attempts, const std::string& what)
      : Error(what), kind_(kind), attempts_(attempts) {}
  Kind kind() const { return kind_; }
  int attempts() const { return attempts_; }

 private:
  Kind kind_;
  int attempts_;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Retries transport failures and unusable replies up to max_attempts with
// exponential backoff, then throws GatewayError. Never falls back to a
// default decision.
class GatewayAgent final : public Agent {
 public:
  GatewayAgent(GatewayConfig config, std::shared_ptr<ChatTransport> transport,
               PromptTemplate prompts = default_prompt_template(),
               Sleeper sleeper = nullptr);
  Decision decide(const Observation& obs) override;

 private:
  GatewayConfig config_;
  std::shared_ptr<ChatTransport> transport_;
  PromptTemplate prompts_;
  Sleeper sleeper_;
};

}  // namespace feesim

#endif  // FEESIM_GATEWAY_HPP_
