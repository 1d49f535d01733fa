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

#ifndef FEESIM_AGENTS_HPP_
#define FEESIM_AGENTS_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "feesim/game.hpp"

namespace feesim {

inline constexpr std::string_view kUtilityDefinition = "U = theta + beta * N - p";

// What one agent remembers about a past round: the public outcome plus its
// own expectation, action and payoff.
struct HistoryEntry {
  int round_index = 0;
  Price price;
  int realized_total = 0;
  int own_expectation = 0;
  Action own_action = Action::kNotAttend;
  double own_payoff = 0.0;
};

// Everything an agent is shown when deciding. Agents see only their own
// type; other agents' types are never broadcast.
struct Observation {
  int agent_id = 0;
  double agent_theta = 0.0;
  double beta = 0.0;
  int population = 0;
  Price price;
  int round_index = 0;
  std::vector<HistoryEntry> visible_history;  // oldest first
  std::string utility_definition{kUtilityDefinition};
};

struct Decision {
  int expected_total = 0;  // total participants, self included
  Action action = Action::kNotAttend;
  std::optional<std::string> rationale;
  // Value reported before clamping into [0, K], when a clamp happened.
  std::optional<std::int64_t> clamped_from;

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct RationalParams {};

// Synthetic stand-in for offline pipeline tests. Not a model of any LLM.
struct HeuristicParams {
  double anchor_weight = 0.0;   // weight on last realized total
  double center_pull = 0.0;     // pull of the no-history guess toward K/2
  double trend_weight = 0.0;    // weight on the two-round linear trend
  double price_ceiling = 49.99; // price at which the ramp reaches zero
  double dispersion = 0.0;      // sd of seeded per-agent noise

  void validate() const;
};

// Recorded decisions keyed by [agent_id][round_index].
using ReplayTable = std::vector<std::map<int, Decision>>;

struct ReplaySource {
  std::shared_ptr<const ReplayTable> table;
};

// System prompt carries identity and private type; user prompt carries the
// round state. Placeholders: {{agent_id}} {{theta}} {{beta}} {{population}}
// {{price}} {{utility}} {{round}} {{history}}.
struct PromptTemplate {
  std::string system;
  std::string user;

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

inline constexpr double kDefaultTemperature = 0.7;
inline constexpr double kLowTemperature = 0.35;

struct GatewayConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-5";
  double temperature = kDefaultTemperature;
  std::optional<int> max_tokens;
  std::string api_key_env = "FEESIM_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds backoff_initial{500};
  int max_in_flight = 8;
  std::optional<PromptTemplate> prompts;  // default template when unset

  void validate() const;
};

using AgentKind = std::variant<RationalParams, HeuristicParams, ReplaySource, GatewayConfig>;

// "rational", "heuristic", "replay" or "gateway".
std::string_view agent_label(const AgentKind& kind);

class Agent {
 public:
  virtual ~Agent() = default;
  // Must be safe to call concurrently for different observations.
  virtual Decision decide(const Observation& obs) = 0;
};

// Plays the maximal fulfilled-expectation count and best-responds to it,
// ignoring history.
class RationalAgent final : public Agent {
 public:
  explicit RationalAgent(GameSpec spec) : spec_(std::move(spec)) {}
  Decision decide(const Observation& obs) override;

 private:
  GameSpec spec_;
};

// Price ramp pulled toward K/2, blended with last realized total and its
// trend. Deterministic given (params, seed, observation).
int heuristic_expectation(const HeuristicParams& params, const Observation& obs,
                          double noise = 0.0);

class HeuristicAgent final : public Agent {
 public:
  HeuristicAgent(HeuristicParams params, std::uint64_t seed);
  Decision decide(const Observation& obs) override;

 private:
  HeuristicParams params_;
  std::uint64_t seed_;
};

class ReplayAgent final : public Agent {
 public:
  explicit ReplayAgent(std::shared_ptr<const ReplayTable> table)
      : table_(std::move(table)) {}
  Decision decide(const Observation& obs) override;

 private:
  std::shared_ptr<const ReplayTable> table_;
};

class ChatTransport;

// Builds one agent per type. `transport` is only used for gateway kinds;
// when null an HTTP transport is built from the config.
std::vector<std::unique_ptr<Agent>> make_agents(
    const AgentKind& kind, const GameSpec& spec, std::uint64_t seed,
    std::shared_ptr<ChatTransport> transport = nullptr);

// splitmix64 step; used to derive per-agent and per-round streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace feesim

#endif  // FEESIM_AGENTS_HPP_
