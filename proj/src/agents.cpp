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

#include "feesim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include <fmt/format.h>

#include "feesim/gateway.hpp"

namespace feesim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void HeuristicParams::validate() const {
  std::vector<std::string> problems;
  if (!unit_interval(anchor_weight)) problems.push_back("anchor_weight must lie in [0, 1]");
  if (!unit_interval(center_pull)) problems.push_back("center_pull must lie in [0, 1]");
  if (!unit_interval(trend_weight)) problems.push_back("trend_weight must lie in [0, 1]");
  if (anchor_weight + trend_weight > 1.0) {
    problems.push_back("anchor_weight + trend_weight must not exceed 1");
  }
  if (!(price_ceiling > 0.0) || !std::isfinite(price_ceiling)) {
    problems.push_back("price_ceiling must be positive");
  }
  if (!(dispersion >= 0.0) || !std::isfinite(dispersion)) {
    problems.push_back("dispersion must be >= 0");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

void GatewayConfig::validate() const {
  std::vector<std::string> problems;
  if (endpoint.empty()) problems.push_back("gateway.endpoint is empty");
  if (model.empty()) problems.push_back("gateway.model is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    problems.push_back("gateway.temperature must lie in [0, 2]");
  }
  if (max_tokens && *max_tokens <= 0) problems.push_back("gateway.max_tokens must be positive");
  if (timeout.count() <= 0) problems.push_back("gateway.timeout_ms must be positive");
  if (max_attempts < 1) problems.push_back("gateway.max_attempts must be >= 1");
  if (backoff_initial.count() < 0) problems.push_back("gateway.backoff_ms must be >= 0");
  if (max_in_flight < 1) problems.push_back("gateway.max_in_flight must be >= 1");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

std::string_view agent_label(const AgentKind& kind) {
  return std::visit(Overloaded{
                        [](const RationalParams&) { return std::string_view("rational"); },
                        [](const HeuristicParams&) { return std::string_view("heuristic"); },
                        [](const ReplaySource&) { return std::string_view("replay"); },
                        [](const GatewayConfig&) { return std::string_view("gateway"); },
                    },
                    kind);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Decision RationalAgent::decide(const Observation& obs) {
  const int n = solve_fee(spec_, obs.price).selected;
  Decision d;
  d.expected_total = n;
  d.action = best_response(obs.agent_theta, spec_.beta(), n, obs.price);
  return d;
}

int heuristic_expectation(const HeuristicParams& params, const Observation& obs,
                          double noise) {
  const double k = obs.population;
  const double ramp = k * (1.0 - obs.price.value() / params.price_ceiling);
  const double base = (1.0 - params.center_pull) * ramp + params.center_pull * k / 2.0;

  double value = base;
  if (!obs.visible_history.empty()) {
    const auto& hist = obs.visible_history;
    const double last = hist.back().realized_total;
    double trend = last;
    if (hist.size() >= 2) trend = last + (last - hist[hist.size() - 2].realized_total);
    value = (1.0 - params.anchor_weight - params.trend_weight) * base +
            params.anchor_weight * last + params.trend_weight * trend;
  }
  const auto rounded = std::lround(value + noise);
  return static_cast<int>(std::clamp<long>(rounded, 0L, obs.population));
}

HeuristicAgent::HeuristicAgent(HeuristicParams params, std::uint64_t seed)
    : params_(params), seed_(seed) {
  params_.validate();
}

Decision HeuristicAgent::decide(const Observation& obs) {
  double noise = 0.0;
  if (params_.dispersion > 0.0) {
    std::mt19937_64 rng(mix_seed(seed_, static_cast<std::uint64_t>(obs.round_index)));
    noise = std::normal_distribution<double>(0.0, params_.dispersion)(rng);
  }
  Decision d;
  d.expected_total = heuristic_expectation(params_, obs, noise);
  d.action = best_response(obs.agent_theta, obs.beta, d.expected_total, obs.price);
  return d;
}

Decision ReplayAgent::decide(const Observation& obs) {
  const auto id = static_cast<std::size_t>(obs.agent_id);
  if (!table_ || id >= table_->size()) {
    throw Error(fmt::format("replay log has no agent {}", obs.agent_id));
  }
  const auto& rounds = (*table_)[id];
  auto it = rounds.find(obs.round_index);
  if (it == rounds.end()) {
    throw Error(fmt::format("replay log has no decision for agent {} in round {}",
                            obs.agent_id, obs.round_index));
  }
  return it->second;
}

std::vector<std::unique_ptr<Agent>> make_agents(const AgentKind& kind, const GameSpec& spec,
                                                std::uint64_t seed,
                                                std::shared_ptr<ChatTransport> transport) {
  const int k = spec.population();
  std::vector<std::unique_ptr<Agent>> agents;
  agents.reserve(static_cast<std::size_t>(k));

  if (const auto* gw = std::get_if<GatewayConfig>(&kind)) {
    gw->validate();
    if (!transport) {
      const char* key = std::getenv(gw->api_key_env.c_str());
      transport = std::make_shared<HttpChatTransport>(gw->endpoint, key ? key : "",
                                                      gw->timeout);
    }
  }

  for (int i = 0; i < k; ++i) {
    const std::uint64_t agent_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    std::visit(Overloaded{
                   [&](const RationalParams&) {
                     agents.push_back(std::make_unique<RationalAgent>(spec));
                   },
                   [&](const HeuristicParams& p) {
                     agents.push_back(std::make_unique<HeuristicAgent>(p, agent_seed));
                   },
                   [&](const ReplaySource& r) {
                     agents.push_back(std::make_unique<ReplayAgent>(r.table));
                   },
                   [&](const GatewayConfig& g) {
                     agents.push_back(std::make_unique<GatewayAgent>(
                         g, transport, g.prompts.value_or(default_prompt_template())));
                   },
               },
               kind);
  }
  return agents;
}

}  // namespace feesim
