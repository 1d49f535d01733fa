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

#ifndef FEESIM_ORCHESTRATOR_HPP_
#define FEESIM_ORCHESTRATOR_HPP_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "feesim/agents.hpp"
#include "feesim/game.hpp"
#include "feesim/trajectory.hpp"
#include "json.hpp"

namespace feesim {

// ---------------------------------------------------------------------------
// Protocol state machine
// ---------------------------------------------------------------------------

enum class FsmState { kInit, kBroadcast, kDecide, kAggregate, kTerminated };
enum class FsmEvent {
  kExperimentStart,
  kBroadcastComplete,
  kAllDecisionsComplete,
  kResultsCalculated,
  kTerminationMet
};

std::string_view to_string(FsmState state);  // "S0".."S4"
std::string_view to_string(FsmEvent event);
FsmState parse_fsm_state(std::string_view text);

class InvalidTransition : public Error {
 public:
  InvalidTransition(FsmState state, FsmEvent event);
  FsmState state() const { return state_; }
  FsmEvent event() const { return event_; }

 private:
  FsmState state_;
  FsmEvent event_;
};

// The five legal moves:
//   S0 --ExperimentStart-->       S1
//   S1 --BroadcastComplete-->     S2
//   S2 --AllDecisionsComplete-->  S3
//   S3 --ResultsCalculated-->     S1   (prices remain)
//   S3 --TerminationMet-->        S4
// Everything else, including any event in S4, throws InvalidTransition.
FsmState transition(FsmState state, FsmEvent event);

// Records every state it passes through, starting at S0.
class Fsm {
 public:
  Fsm() : trace_{FsmState::kInit} {}
  FsmState state() const { return trace_.back(); }
  FsmState fire(FsmEvent event);
  const std::vector<FsmState>& trace() const { return trace_; }

 private:
  std::vector<FsmState> trace_;
};

// True iff the trace reads S0 S1 S2 S3 (S1 S2 S3)* S4 and contains exactly
// `rounds` decision phases.
bool is_valid_trace(std::span<const FsmState> trace, std::optional<std::size_t> rounds = {});

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct AgentRecord {
  int agent_id = 0;
  double theta = 0.0;
  Decision decision;
  double payoff = 0.0;

  friend bool operator==(const AgentRecord&, const AgentRecord&) = default;
};

struct RoundRecord {
  int round_index = 0;
  Price price;
  int realized_total = 0;
  std::vector<AgentRecord> agents;  // ordered by agent_id

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

// The last min(window, size) records, order preserved.
template <class T>
std::span<const T> visible_history(std::span<const T> records, int window) {
  const auto keep = static_cast<std::size_t>(std::max(window, 0));
  const auto n = std::min(keep, records.size());
  return records.subspan(records.size() - n, n);
}

// One agent's view of past rounds.
std::vector<HistoryEntry> agent_history(std::span<const RoundRecord> records, int agent_id);

struct ExperimentCell {
  double beta = 0.25;
  PriceSequence trajectory;
  int window_length = 0;
  // Back-to-back plays of the trajectory inside one run (dynamic only).
  int repeats = 1;
  AgentKind agent = RationalParams{};
  std::uint64_t seed = 1;

  // "beta=0.25/path=converging/window=3/agent=rational/seed=1"
  std::string key() const;
  void validate(int population) const;
  std::size_t total_rounds() const { return trajectory.size() * static_cast<std::size_t>(repeats); }
};

// Orders cells by beta, path kind, window, agent label, seed.
bool cell_less(const ExperimentCell& a, const ExperimentCell& b);

inline constexpr int kRunLogSchemaVersion = 1;

struct RunLog {
  int schema_version = kRunLogSchemaVersion;
  ExperimentCell cell;
  std::vector<double> types;
  std::vector<RoundRecord> rounds;
  // One trace per independent game: one for dynamic cells, one per price
  // for static cells.
  std::vector<std::vector<FsmState>> traces;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  std::optional<std::string> failure;

  GameSpec spec() const { return GameSpec(types, cell.beta); }
  bool ok() const { return !failure.has_value(); }
};

// Replay decisions indexed by [agent_id][round_index].
std::shared_ptr<const ReplayTable> replay_table(const RunLog& log);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct RoundOptions {
  // Upper bound on concurrent agent decisions; 1 decides sequentially.
  int max_in_flight = 1;
};

// Thrown when any agent fails; `partial` holds the decisions that
// did complete (realized_total counts only those).
class RoundFailure : public Error {
 public:
  RoundFailure(const std::string& what, RoundRecord partial)
      : Error(what), partial_(std::move(partial)) {}
  const RoundRecord& partial() const { return partial_; }

 private:
  RoundRecord partial_;
};

// Simultaneous move: every agent sees only rounds before this one.
RoundRecord run_round(const GameSpec& spec, Price price, int round_index,
                      std::span<const std::unique_ptr<Agent>> agents,
                      std::span<const RoundRecord> prior_records, int window,
                      const RoundOptions& options = {});

class CellFailure : public Error {
 public:
  CellFailure(const std::string& what, RunLog partial)
      : Error(what), partial_(std::move(partial)) {}
  const RunLog& partial() const { return partial_; }

 private:
  RunLog partial_;
};

RunLog run_cell(const ExperimentCell& cell, const GameSpec& spec,
                std::span<const std::unique_ptr<Agent>> agents,
                const RoundOptions& options = {});

}  // namespace feesim

#endif  // FEESIM_ORCHESTRATOR_HPP_
