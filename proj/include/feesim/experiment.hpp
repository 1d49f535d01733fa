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

#ifndef FEESIM_EXPERIMENT_HPP_
#define FEESIM_EXPERIMENT_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "feesim/agents.hpp"
#include "feesim/orchestrator.hpp"
#include "feesim/trajectory.hpp"
#include "json.hpp"

namespace feesim {

class ChatTransport;

// The whole factorial as read from a JSON config file. Keys:
//   population, types, beta_levels, targets, include_static, trajectories,
//   windows, repeats, offset, seeds, agent, heuristic{...}, gateway{...},
//   output{dir}, record_timestamps, threads
struct ExperimentConfig {
  int population = 50;
  std::vector<double> types;  // empty: integer grid 0..population-1
  std::vector<double> beta_levels = {0.25, 0.75};
  std::vector<int> targets = kDesignedTargets;
  bool include_static = true;
  std::vector<TrajectoryKind> trajectories = {kDynamicTrajectoryKinds.begin(),
                                              kDynamicTrajectoryKinds.end()};
  std::vector<int> windows = {1, 3, 6};
  int repeats = 1;
  double offset = kDefaultPriceOffset;
  std::vector<std::uint64_t> seeds = {1};
  AgentKind agent = RationalParams{};
  std::string output_dir = "runs";
  bool record_timestamps = false;
  int threads = 0;  // 0: OpenMP default

  GameSpec spec(double beta) const;

  // Cells in canonical order. Throws ConfigError on duplicate keys.
  std::vector<ExperimentCell> cells() const;

  nlohmann::json to_json() const;
  // Collects every problem before throwing ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& doc);
};

// K=50, beta {0.25, 0.75}, windows {1, 3, 6}, six designed prices, one
// play per trajectory, temperature 0.7 for gateway agents.
ExperimentConfig paper_profile();
// Windows {1, 7, 13} over three back-to-back plays of each trajectory.
ExperimentConfig extended_profile();

nlohmann::json agent_kind_to_json(const AgentKind& kind);
AgentKind agent_kind_from_json(const nlohmann::json& j);

enum class Execution { kSerial, kParallel };

struct FactorialOptions {
  Execution execution = Execution::kParallel;
  int threads = 0;                          // 0: OpenMP default
  RoundOptions round;                       // within-round concurrency
  std::shared_ptr<ChatTransport> transport; // test hook for gateway agents
};

struct CellError {
  std::string key;
  std::string message;
  RunLog partial;
};

struct FactorialResult {
  std::vector<RunLog> logs;  // successful cells, canonical order
  std::vector<CellError> failures;
};

// Cells are independent; a failing cell never affects the others.
FactorialResult run_factorial(const ExperimentConfig& config, const FactorialOptions& options = {});

}  // namespace feesim

#endif  // FEESIM_EXPERIMENT_HPP_
