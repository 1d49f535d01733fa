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

#include <algorithm>
#include <atomic>
#include <memory>
#include <set>
#include <string>

#include "doctest.h"
#include "feesim/errors.hpp"
#include "feesim/experiment.hpp"
#include "feesim/gateway.hpp"

namespace feesim {
namespace {

using nlohmann::json;

// Answers like a rational player, but fails every request for one beta.
class SelectiveTransport final : public ChatTransport {
 public:
  explicit SelectiveTransport(std::string poison) : poison_(std::move(poison)) {}
  std::string complete(const ChatRequest& request) override {
    ++calls;
    for (const auto& m : request.messages) {
      if (m.content.find(poison_) != std::string::npos) throw TransportError("refused");
    }
    return R"({"expected_total": 10, "action": "not_attend"})";
  }
  std::atomic<int> calls{0};

 private:
  std::string poison_;
};

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.problems().begin(), e.problems().end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

TEST_SUITE("experiment") {

TEST_CASE("default factorial has twenty six cells") {
  const auto config = paper_profile();
  const auto cells = config.cells();
  CHECK(cells.size() == 26);
  std::set<std::string> keys;
  for (const auto& c : cells) keys.insert(c.key());
  CHECK(keys.size() == 26);
  CHECK(std::is_sorted(cells.begin(), cells.end(), cell_less));
  int statics = 0;
  for (const auto& c : cells) {
    if (c.trajectory.kind == TrajectoryKind::kStatic) {
      ++statics;
      CHECK(c.window_length == 0);
    }
    CHECK(c.trajectory.size() == 6);
  }
  CHECK(statics == 2);

  const auto ext = extended_profile().cells();
  CHECK(ext.size() == 26);
  for (const auto& c : ext) {
    if (c.trajectory.kind != TrajectoryKind::kStatic) CHECK(c.total_rounds() == 18);
  }
}

TEST_CASE("factorial size follows the configured levels") {
  ExperimentConfig c;
  c.seeds = {1, 2, 3};
  c.windows = {0, 2};
  c.include_static = false;
  c.trajectories = {TrajectoryKind::kConverging};
  CHECK(c.cells().size() == 2 * 2 * 3);
}

TEST_CASE("duplicate cells are rejected") {
  ExperimentConfig c;
  c.windows = {3, 3};
  CHECK_THROWS_AS(c.cells(), ConfigError);
  c.windows = {3};
  c.seeds = {4, 4};
  CHECK_THROWS_AS(c.cells(), ConfigError);
}

TEST_CASE("rational factorial reproduces the designed equilibria") {
  const auto result = run_factorial(paper_profile());
  CHECK(result.failures.empty());
  REQUIRE(result.logs.size() == 26);
  for (const auto& log : result.logs) {
    CHECK(log.ok());
    CHECK(log.config_snapshot == paper_profile().to_json());
    for (std::size_t j = 0; j < log.rounds.size(); ++j) {
      CHECK(log.rounds[j].realized_total == log.cell.trajectory.target_counts[j]);
    }
  }
}

TEST_CASE("serial and parallel execution agree") {
  ExperimentConfig c;
  HeuristicParams hp;
  hp.anchor_weight = 0.6;
  hp.dispersion = 2.0;
  c.agent = hp;
  c.seeds = {1, 2};
  const auto a = run_factorial(c, {Execution::kSerial, 1, {}, nullptr});
  const auto b = run_factorial(c, {Execution::kParallel, 4, RoundOptions{3}, nullptr});
  REQUIRE(a.logs.size() == b.logs.size());
  for (std::size_t i = 0; i < a.logs.size(); ++i) {
    CHECK(a.logs[i].cell.key() == b.logs[i].cell.key());
    CHECK(a.logs[i].rounds == b.logs[i].rounds);
  }
}

TEST_CASE("a failing cell does not disturb the others") {
  ExperimentConfig c;
  GatewayConfig g;
  g.max_attempts = 1;
  g.backoff_initial = std::chrono::milliseconds(0);
  c.agent = g;
  auto transport = std::make_shared<SelectiveTransport>("beta = 0.75");
  const auto result = run_factorial(c, {Execution::kParallel, 0, {}, transport});
  CHECK(result.logs.size() == 13);
  CHECK(result.failures.size() == 13);
  for (const auto& log : result.logs) {
    CHECK(log.cell.beta == 0.25);
    CHECK(log.rounds.size() == 6);
  }
  for (const auto& f : result.failures) {
    CHECK(f.key.find("beta=0.75") == 0);
    CHECK_FALSE(f.partial.ok());
    CHECK(f.message.find("refused") != std::string::npos);
    CHECK(f.partial.rounds.empty());
  }
}

TEST_CASE("configuration round trips through json") {
  for (const auto& config : {paper_profile(), extended_profile()}) {
    const auto again = ExperimentConfig::from_json(config.to_json());
    CHECK(again.to_json() == config.to_json());
  }
  ExperimentConfig h;
  HeuristicParams hp;
  hp.center_pull = 0.3;
  h.agent = hp;
  h.seeds = {5, 9};
  CHECK(ExperimentConfig::from_json(h.to_json()).to_json() == h.to_json());
  CHECK(ExperimentConfig::from_json(json::object()).to_json() == paper_profile().to_json());
}

TEST_CASE("configuration errors are reported together") {
  const auto doc = json::parse(R"({
    "population": 0,
    "beta_levels": [1.5],
    "windows": [-1],
    "colour": "blue",
    "agent": "heuristic",
    "heuristic": {"anchor_weight": 0.8, "center_pull": 0.8, "volume": 3},
    "seeds": "many"
  })");
  try {
    ExperimentConfig::from_json(doc);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "colour"));
    CHECK(mentions(e, "heuristic.volume"));
    CHECK(mentions(e, "seeds"));
    CHECK(mentions(e, "population"));
    CHECK(mentions(e, "beta_levels"));
    CHECK(mentions(e, "windows"));
    CHECK(e.problems().size() >= 6);
  }
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"agent": "oracle"})")), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"trajectories": ["sideways"]})")),
                  ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse("[1, 2]")), ConfigError);
}

TEST_CASE("agent kinds serialize") {
  GatewayConfig g;
  g.temperature = kLowTemperature;
  g.max_tokens = 128;
  const auto back = agent_kind_from_json(agent_kind_to_json(g));
  const auto* gb = std::get_if<GatewayConfig>(&back);
  REQUIRE(gb != nullptr);
  CHECK(gb->temperature == kLowTemperature);
  CHECK(gb->max_tokens == 128);
  CHECK(std::holds_alternative<RationalParams>(agent_kind_from_json(agent_kind_to_json(RationalParams{}))));
}

}  // TEST_SUITE

}  // namespace
}  // namespace feesim
