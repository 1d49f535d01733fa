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

#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "feesim/agents.hpp"
#include "feesim/errors.hpp"
#include "support/oracles.hpp"

namespace feesim {
namespace {

Observation observation(double theta, double beta, int k, double price) {
  Observation obs;
  obs.agent_theta = theta;
  obs.beta = beta;
  obs.population = k;
  obs.price = Price(price);
  return obs;
}

HistoryEntry entry(int round, int realized) {
  HistoryEntry h;
  h.round_index = round;
  h.price = Price(30);
  h.realized_total = realized;
  return h;
}

TEST_SUITE("agents") {

TEST_CASE("rational agent examples") {
  RationalAgent scholars(GameSpec({1, 2, 3, 4, 5, 6}, 0.5));
  const auto d = scholars.decide(observation(3, 0.5, 6, 4.4));
  // Maximal fixed point of the worked example is 5 when N counts self.
  CHECK(d.expected_total == 5);
  CHECK(d.action == Action::kAttend);

  RationalAgent grid(GameSpec::integer_grid(50, 0.25));
  const auto low = grid.decide(observation(0, 0.25, 50, 12.49));
  CHECK(low.expected_total == 50);
  CHECK(low.action == Action::kAttend);
  const auto high = grid.decide(observation(49, 0.25, 50, 49 + 0.25 * 50 + 0.5));
  CHECK(high.expected_total == 0);
  CHECK(high.action == Action::kNotAttend);
}

TEST_CASE("rational agent ignores history") {
  const auto spec = GameSpec::integer_grid(50, 0.75);
  RationalAgent agent(spec);
  auto obs = observation(20, 0.75, 50, 44.99);
  const auto bare = agent.decide(obs);
  for (int w = 1; w <= 6; ++w) {
    obs.visible_history.push_back(entry(w - 1, (w * 17) % 51));
    CHECK(agent.decide(obs) == bare);
  }
  CHECK(bare.expected_total == 20);
}

TEST_CASE("heuristic examples") {
  HeuristicParams full;
  full.center_pull = 1.0;
  CHECK(heuristic_expectation(full, observation(0, 0.25, 50, 12.49)) == 25);
  CHECK(heuristic_expectation(full, observation(0, 0.25, 50, 49.99)) == 25);

  HeuristicParams ramp;
  CHECK(heuristic_expectation(ramp, observation(0, 0.25, 50, 49.99)) == 0);
  CHECK(heuristic_expectation(ramp, observation(0, 0.25, 50, 0)) == 50);
  CHECK(heuristic_expectation(ramp, observation(0, 0.25, 50, 80)) == 0);

  HeuristicParams pull;
  pull.center_pull = 0.4;
  CHECK(heuristic_expectation(pull, observation(0, 0.25, 50, 12.49)) == 33);
}

TEST_CASE("heuristic blend with history") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    HeuristicParams p;
    p.center_pull = rng.uniform();
    p.anchor_weight = rng.uniform(0, 0.6);
    p.trend_weight = rng.uniform(0, 0.4);
    const int k = rng.uniform_int(1, 80);
    auto obs = observation(0, 0.5, k, rng.uniform(0, 60));
    const int len = rng.uniform_int(0, 4);
    for (int i = 0; i < len; ++i) obs.visible_history.push_back(entry(i, rng.uniform_int(0, k)));

    const double base = (1 - p.center_pull) * k * (1 - obs.price.value() / p.price_ceiling) +
                        p.center_pull * k / 2.0;
    double expected = base;
    if (len >= 1) {
      const double last = obs.visible_history.back().realized_total;
      const double prev = len >= 2 ? obs.visible_history[len - 2].realized_total : last;
      expected = (1 - p.anchor_weight - p.trend_weight) * base + p.anchor_weight * last +
                 p.trend_weight * (2 * last - prev);
    }
    const int want = static_cast<int>(std::clamp<long>(std::lround(expected), 0, k));
    CHECK(heuristic_expectation(p, obs) == want);
  }
}

TEST_CASE("heuristic parameters must lie on the simplex") {
  HeuristicParams p;
  p.anchor_weight = 0.7;
  p.trend_weight = 0.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.trend_weight = 0.3;
  CHECK_NOTHROW(p.validate());
  p.center_pull = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.center_pull = 0.5;
  p.dispersion = -1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.dispersion = 0;
  p.price_ceiling = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(HeuristicAgent(p, 1), ConfigError);
}

TEST_CASE("heuristic agents are deterministic per seed") {
  HeuristicParams p;
  p.center_pull = 0.3;
  p.dispersion = 4.0;
  HeuristicAgent a(p, 11);
  HeuristicAgent b(p, 11);
  HeuristicAgent c(p, 12);
  bool differs = false;
  for (int round = 0; round < 20; ++round) {
    auto obs = observation(10, 0.25, 50, 27.49);
    obs.round_index = round;
    const auto da = a.decide(obs);
    CHECK(da == b.decide(obs));
    CHECK(da == a.decide(obs));
    CHECK(da.expected_total >= 0);
    CHECK(da.expected_total <= 50);
    CHECK(da.action == best_response(10, 0.25, da.expected_total, Price(27.49)));
    differs = differs || !(da == c.decide(obs));
  }
  CHECK(differs);
}

TEST_CASE("replay agent serves recorded decisions") {
  auto table = std::make_shared<ReplayTable>(2);
  Decision d;
  d.expected_total = 12;
  d.action = Action::kAttend;
  d.rationale = "cheap";
  (*table)[1][3] = d;
  ReplayAgent agent(table);
  auto obs = observation(1, 0.25, 2, 10);
  obs.agent_id = 1;
  obs.round_index = 3;
  CHECK(agent.decide(obs) == d);
  obs.round_index = 4;
  CHECK_THROWS_AS(agent.decide(obs), Error);
  obs.agent_id = 5;
  CHECK_THROWS_AS(agent.decide(obs), Error);
}

TEST_CASE("make_agents builds one agent per type") {
  const auto spec = GameSpec::integer_grid(7, 0.25);
  CHECK(make_agents(RationalParams{}, spec, 1).size() == 7);
  CHECK(make_agents(HeuristicParams{}, spec, 1).size() == 7);
  GatewayConfig bad;
  bad.temperature = 3.0;
  CHECK_THROWS_AS(make_agents(bad, spec, 1), ConfigError);
}

TEST_CASE("agent labels and seeds") {
  CHECK(agent_label(RationalParams{}) == "rational");
  CHECK(agent_label(HeuristicParams{}) == "heuristic");
  CHECK(agent_label(ReplaySource{}) == "replay");
  CHECK(agent_label(GatewayConfig{}) == "gateway");
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(3, 4) == mix_seed(3, 4));
}

TEST_CASE("gateway defaults") {
  GatewayConfig g;
  CHECK(g.temperature == 0.7);
  CHECK(g.max_attempts == 3);
  CHECK_NOTHROW(g.validate());
  g.temperature = kLowTemperature;
  CHECK_NOTHROW(g.validate());
  g.temperature = -0.1;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace feesim
