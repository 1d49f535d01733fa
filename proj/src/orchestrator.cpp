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

#include "feesim/orchestrator.hpp"

#include <exception>
#include <tuple>

#include <fmt/format.h>
#include <omp.h>

namespace feesim {

std::string_view to_string(FsmState state) {
  switch (state) {
    case FsmState::kInit: return "S0";
    case FsmState::kBroadcast: return "S1";
    case FsmState::kDecide: return "S2";
    case FsmState::kAggregate: return "S3";
    case FsmState::kTerminated: return "S4";
  }
  return "?";
}

std::string_view to_string(FsmEvent event) {
  switch (event) {
    case FsmEvent::kExperimentStart: return "ExperimentStart";
    case FsmEvent::kBroadcastComplete: return "BroadcastComplete";
    case FsmEvent::kAllDecisionsComplete: return "AllDecisionsComplete";
    case FsmEvent::kResultsCalculated: return "ResultsCalculated";
    case FsmEvent::kTerminationMet: return "TerminationMet";
  }
  return "?";
}

FsmState parse_fsm_state(std::string_view text) {
  for (auto s : {FsmState::kInit, FsmState::kBroadcast, FsmState::kDecide,
                 FsmState::kAggregate, FsmState::kTerminated}) {
    if (to_string(s) == text) return s;
  }
  throw SchemaError(fmt::format("unknown FSM state '{}'", text));
}

InvalidTransition::InvalidTransition(FsmState state, FsmEvent event)
    : Error(fmt::format("invalid transition: {} in state {}", to_string(event),
                        to_string(state))),
      state_(state),
      event_(event) {}

FsmState transition(FsmState state, FsmEvent event) {
  using S = FsmState;
  using E = FsmEvent;
  if (state == S::kInit && event == E::kExperimentStart) return S::kBroadcast;
  if (state == S::kBroadcast && event == E::kBroadcastComplete) return S::kDecide;
  if (state == S::kDecide && event == E::kAllDecisionsComplete) return S::kAggregate;
  if (state == S::kAggregate && event == E::kResultsCalculated) return S::kBroadcast;
  if (state == S::kAggregate && event == E::kTerminationMet) return S::kTerminated;
  throw InvalidTransition(state, event);
}

FsmState Fsm::fire(FsmEvent event) {
  trace_.push_back(transition(state(), event));
  return trace_.back();
}

bool is_valid_trace(std::span<const FsmState> trace, std::optional<std::size_t> rounds) {
  using S = FsmState;
  if (trace.size() < 5 || trace[0] != S::kInit || trace.back() != S::kTerminated) return false;
  std::size_t decisions = 0;
  std::size_t i = 1;
  while (true) {
    if (i + 2 >= trace.size() || trace[i] != S::kBroadcast || trace[i + 1] != S::kDecide ||
        trace[i + 2] != S::kAggregate) {
      return false;
    }
    ++decisions;
    i += 3;
    if (trace[i] == S::kTerminated) break;
  }
  if (i + 1 != trace.size()) return false;
  return !rounds || *rounds == decisions;
}

std::vector<HistoryEntry> agent_history(std::span<const RoundRecord> records, int agent_id) {
  std::vector<HistoryEntry> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto& mine = r.agents.at(static_cast<std::size_t>(agent_id));
    out.push_back(HistoryEntry{r.round_index, r.price, r.realized_total,
                               mine.decision.expected_total, mine.decision.action,
                               mine.payoff});
  }
  return out;
}

std::string ExperimentCell::key() const {
  return fmt::format("beta={}/path={}/window={}/agent={}/seed={}", beta,
                     to_string(trajectory.kind), window_length, agent_label(agent), seed);
}

void ExperimentCell::validate(int population) const {
  std::vector<std::string> problems;
  if (!(beta >= 0.0 && beta < 1.0)) problems.push_back("beta level must lie in [0, 1)");
  if (window_length < 0) problems.push_back("window length must be >= 0");
  if (repeats < 1) problems.push_back("repeats must be >= 1");
  if (trajectory.kind == TrajectoryKind::kStatic && (window_length != 0 || repeats != 1)) {
    problems.push_back("static cells take window 0 and a single repeat");
  }
  try {
    trajectory.validate(population);
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

bool cell_less(const ExperimentCell& a, const ExperimentCell& b) {
  return std::forward_as_tuple(a.beta, a.trajectory.kind, a.window_length, agent_label(a.agent),
                               a.seed, a.repeats) <
         std::forward_as_tuple(b.beta, b.trajectory.kind, b.window_length, agent_label(b.agent),
                               b.seed, b.repeats);
}

std::shared_ptr<const ReplayTable> replay_table(const RunLog& log) {
  auto table = std::make_shared<ReplayTable>(log.types.size());
  for (const auto& r : log.rounds) {
    for (const auto& a : r.agents) {
      (*table).at(static_cast<std::size_t>(a.agent_id))[r.round_index] = a.decision;
    }
  }
  return table;
}

RoundRecord run_round(const GameSpec& spec, Price price, int round_index,
                      std::span<const std::unique_ptr<Agent>> agents,
                      std::span<const RoundRecord> prior_records, int window,
                      const RoundOptions& options) {
  const int k = spec.population();
  if (static_cast<int>(agents.size()) != k) {
    throw InvalidArgument(fmt::format("{} agents for a population of {}", agents.size(), k));
  }
  const auto visible = visible_history(prior_records, window);
  const auto types = spec.types();

  std::vector<std::optional<Decision>> decisions(agents.size());
  std::vector<std::string> errors(agents.size());
  const int threads = std::max(1, std::min(options.max_in_flight, k));

#pragma omp parallel for num_threads(threads) schedule(dynamic) if (threads > 1)
  for (int i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      Observation obs;
      obs.agent_id = i;
      obs.agent_theta = types[idx];
      obs.beta = spec.beta();
      obs.population = k;
      obs.price = price;
      obs.round_index = round_index;
      obs.visible_history = agent_history(visible, i);
      decisions[idx] = agents[idx]->decide(obs);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    } catch (...) {
      errors[idx] = "unknown error";
    }
  }

  RoundRecord rec;
  rec.round_index = round_index;
  rec.price = price;
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (!decisions[i]) {
      failed.push_back(fmt::format("agent {}: {}", i, errors[i]));
      continue;
    }
    if (decisions[i]->expected_total < 0 || decisions[i]->expected_total > k) {
      failed.push_back(fmt::format("agent {}: expectation {} outside [0, {}]", i,
                                   decisions[i]->expected_total, k));
      continue;
    }
    rec.agents.push_back(AgentRecord{static_cast<int>(i), types[i], *decisions[i], 0.0});
    if (decisions[i]->action == Action::kAttend) ++rec.realized_total;
  }
  for (auto& a : rec.agents) {
    if (a.decision.action == Action::kAttend) {
      a.payoff = utility(a.theta, spec.beta(), rec.realized_total, price);
    }
  }
  if (!failed.empty()) {
    throw RoundFailure(fmt::format("round {} failed for {} agent(s): {}", round_index,
                                   failed.size(), fmt::join(failed, "; ")),
                       std::move(rec));
  }
  return rec;
}

RunLog run_cell(const ExperimentCell& cell, const GameSpec& spec,
                std::span<const std::unique_ptr<Agent>> agents, const RoundOptions& options) {
  cell.validate(spec.population());
  if (spec.beta() != cell.beta) {
    throw InvalidArgument(fmt::format("spec beta {} differs from cell beta {}", spec.beta(),
                                      cell.beta));
  }
  RunLog log;
  log.cell = cell;
  log.types.assign(spec.types().begin(), spec.types().end());

  const auto& prices = cell.trajectory.prices;
  auto play = [&](Fsm& fsm, int round_index, Price price, std::span<const RoundRecord> prior,
                  int window) {
    fsm.fire(FsmEvent::kBroadcastComplete);
    try {
      log.rounds.push_back(run_round(spec, price, round_index, agents, prior, window, options));
    } catch (const RoundFailure& f) {
      log.traces.push_back(fsm.trace());
      log.failure = f.what();
      throw CellFailure(fmt::format("{}: {}", cell.key(), f.what()), log);
    }
    fsm.fire(FsmEvent::kAllDecisionsComplete);
  };

  if (cell.trajectory.kind == TrajectoryKind::kStatic) {
    for (std::size_t j = 0; j < prices.size(); ++j) {
      Fsm fsm;
      fsm.fire(FsmEvent::kExperimentStart);
      play(fsm, static_cast<int>(j), prices[j], {}, 0);
      fsm.fire(FsmEvent::kTerminationMet);
      log.traces.push_back(fsm.trace());
    }
    return log;
  }

  Fsm fsm;
  fsm.fire(FsmEvent::kExperimentStart);
  const std::size_t total = cell.total_rounds();
  // Reserved so the span over earlier rounds stays valid while appending.
  log.rounds.reserve(total);
  for (std::size_t j = 0; j < total; ++j) {
    const std::span<const RoundRecord> prior(log.rounds.data(), j);
    play(fsm, static_cast<int>(j), prices[j % prices.size()], prior, cell.window_length);
    fsm.fire(j + 1 < total ? FsmEvent::kResultsCalculated : FsmEvent::kTerminationMet);
  }
  log.traces.push_back(fsm.trace());
  return log;
}

}  // namespace feesim
