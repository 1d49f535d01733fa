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

#include "feesim/gateway.hpp"

#include <thread>

#include <fmt/format.h>

#include "httplib.h"

namespace feesim {

nlohmann::json to_wire(const ChatRequest& request) {
  nlohmann::json body;
  body["model"] = request.model;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = request.temperature;
  if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
  return body;
}

std::string content_from_wire(const nlohmann::json& response) {
  const auto choices = response.find("choices");
  if (choices == response.end() || !choices->is_array() || choices->empty()) {
    throw TransportError("chat response has no choices");
  }
  const auto& message = (*choices)[0].value("message", nlohmann::json::object());
  const auto content = message.find("content");
  if (content == message.end() || !content->is_string()) {
    throw TransportError("chat response choice has no text content");
  }
  return content->get<std::string>();
}

HttpChatTransport::HttpChatTransport(std::string endpoint, std::string api_key,
                                     std::chrono::milliseconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument(fmt::format("endpoint '{}' has no scheme", endpoint));
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  origin_ = endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
}

std::string HttpChatTransport::complete(const ChatRequest& request) {
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, to_wire(request).dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout_)) {
      throw TimeoutError(fmt::format("request to {} timed out after {} ms", origin_,
                                     timeout_.count()));
    }
    throw TransportError(fmt::format("request to {} failed: {}", origin_,
                                     httplib::to_string(err)));
  }
  if (res->status != 200) {
    throw TransportError(fmt::format("HTTP {} from {}: {}", res->status, origin_,
                                     res->body.substr(0, 200)));
  }
  auto body = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded()) throw TransportError("chat response body is not JSON");
  return content_from_wire(body);
}

GatewayAgent::GatewayAgent(GatewayConfig config, std::shared_ptr<ChatTransport> transport,
                           PromptTemplate prompts, Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      prompts_(std::move(prompts)),
      sleeper_(std::move(sleeper)) {
  config_.validate();
  if (!transport_) throw InvalidArgument("gateway agent needs a transport");
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

Decision GatewayAgent::decide(const Observation& obs) {
  const RenderedPrompt prompt = render_prompt(obs, prompts_);
  ChatRequest request;
  request.model = config_.model;
  request.temperature = config_.temperature;
  request.max_tokens = config_.max_tokens;
  request.messages = {{"system", prompt.system}, {"user", prompt.user}};

  GatewayError::Kind last_kind = GatewayError::Kind::kTransport;
  std::string last_message;
  auto backoff = config_.backoff_initial;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    try {
      return parse_reply(transport_->complete(request), obs.population);
    } catch (const TimeoutError& e) {
      last_kind = GatewayError::Kind::kTimeout;
      last_message = e.what();
    } catch (const TransportError& e) {
      last_kind = GatewayError::Kind::kTransport;
      last_message = e.what();
    } catch (const ReplyError& e) {
      last_kind = GatewayError::Kind::kInvalidReply;
      last_message = e.what();
    }
    if (attempt < config_.max_attempts) {
      sleeper_(backoff);
      backoff *= 2;
    }
  }
  throw GatewayError(last_kind, config_.max_attempts,
                     fmt::format("agent {} round {}: gave up after {} attempt(s): {}",
                                 obs.agent_id, obs.round_index, config_.max_attempts,
                                 last_message));
}

}  // namespace feesim
