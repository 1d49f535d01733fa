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

#include "feesim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <omp.h>

#include "feesim/gateway.hpp"

namespace feesim {

namespace {

using Json = nlohmann::json;

// Reads typed fields out of a JSON object, accumulating problems instead
// of stopping at the first one.
class Reader {
 public:
  Reader(const Json& obj, std::string prefix, std::vector<std::string>& problems)
      : obj_(obj), prefix_(std::move(prefix)), problems_(problems) {
    if (!obj_.is_object()) problems_.push_back(fmt::format("{} must be an object", where("")));
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.is_object()) return;
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const Json::exception&) {
      problems_.push_back(fmt::format("{}: wrong type ({})", where(key), it->type_name()));
    }
  }

  void get_ms(const char* key, std::chrono::milliseconds& out) {
    long long ms = out.count();
    get(key, ms);
    out = std::chrono::milliseconds(ms);
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    if (!obj_.is_object()) return nullptr;
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void reject_unknown() {
    if (!obj_.is_object()) return;
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) problems_.push_back(fmt::format("{}: unknown key", where(k)));
    }
  }

  std::string where(std::string_view key) const {
    if (prefix_.empty()) return std::string(key);
    return key.empty() ? prefix_ : fmt::format("{}.{}", prefix_, key);
  }

  void problem(std::string msg) { problems_.push_back(std::move(msg)); }

 private:
  const Json& obj_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  std::set<std::string, std::less<>> seen_;
};

HeuristicParams heuristic_from(const Json& j, const std::string& prefix,
                               std::vector<std::string>& problems) {
  HeuristicParams p;
  Reader r(j, prefix, problems);
  r.get("anchor_weight", p.anchor_weight);
  r.get("center_pull", p.center_pull);
  r.get("trend_weight", p.trend_weight);
  r.get("price_ceiling", p.price_ceiling);
  r.get("dispersion", p.dispersion);
  r.reject_unknown();
  try {
    p.validate();
  } catch (const ConfigError& e) {
    for (const auto& msg : e.problems()) problems.push_back(fmt::format("{}: {}", prefix, msg));
  }
  return p;
}

GatewayConfig gateway_from(const Json& j, const std::string& prefix,
                           std::vector<std::string>& problems) {
  GatewayConfig g;
  Reader r(j, prefix, problems);
  r.get("endpoint", g.endpoint);
  r.get("model", g.model);
  r.get("temperature", g.temperature);
  if (const Json* mt = r.child("max_tokens"); mt && !mt->is_null()) {
    if (mt->is_number_integer()) g.max_tokens = mt->get<int>();
    else r.problem(fmt::format("{}: wrong type", r.where("max_tokens")));
  }
  r.get("api_key_env", g.api_key_env);
  r.get_ms("timeout_ms", g.timeout);
  r.get("max_attempts", g.max_attempts);
  r.get_ms("backoff_ms", g.backoff_initial);
  r.get("max_in_flight", g.max_in_flight);
  if (const Json* pt = r.child("prompt")) {
    PromptTemplate t;
    Reader pr(*pt, r.where("prompt"), problems);
    pr.get("system", t.system);
    pr.get("user", t.user);
    pr.reject_unknown();
    g.prompts = t;
  }
  r.reject_unknown();
  try {
    g.validate();
  } catch (const ConfigError& e) {
    for (const auto& msg : e.problems()) problems.push_back(msg);
  }
  return g;
}

Json heuristic_to_json(const HeuristicParams& p) {
  return {{"anchor_weight", p.anchor_weight},
          {"center_pull", p.center_pull},
          {"trend_weight", p.trend_weight},
          {"price_ceiling", p.price_ceiling},
          {"dispersion", p.dispersion}};
}

Json gateway_to_json(const GatewayConfig& g) {
  Json j = {{"endpoint", g.endpoint},
            {"model", g.model},
            {"temperature", g.temperature},
            {"max_tokens", g.max_tokens ? Json(*g.max_tokens) : Json(nullptr)},
            {"api_key_env", g.api_key_env},
            {"timeout_ms", g.timeout.count()},
            {"max_attempts", g.max_attempts},
            {"backoff_ms", g.backoff_initial.count()},
            {"max_in_flight", g.max_in_flight}};
  if (g.prompts) j["prompt"] = {{"system", g.prompts->system}, {"user", g.prompts->user}};
  return j;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
}

}  // namespace

Json agent_kind_to_json(const AgentKind& kind) {
  Json j = {{"kind", std::string(agent_label(kind))}};
  if (const auto* h = std::get_if<HeuristicParams>(&kind)) j.update(heuristic_to_json(*h));
  if (const auto* g = std::get_if<GatewayConfig>(&kind)) j.update(gateway_to_json(*g));
  return j;
}

AgentKind agent_kind_from_json(const Json& j) {
  std::vector<std::string> problems;
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw SchemaError("agent description needs a string 'kind'");
  }
  const auto kind = j["kind"].get<std::string>();
  Json rest = j;
  rest.erase("kind");
  AgentKind out;
  if (kind == "rational") {
    out = RationalParams{};
  } else if (kind == "replay") {
    out = ReplaySource{};
  } else if (kind == "heuristic") {
    out = heuristic_from(rest, "agent", problems);
  } else if (kind == "gateway") {
    out = gateway_from(rest, "agent", problems);
  } else {
    throw SchemaError(fmt::format("unknown agent kind '{}'", kind));
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return out;
}

GameSpec ExperimentConfig::spec(double beta) const {
  if (!types.empty()) return GameSpec(types, beta);
  return GameSpec::integer_grid(population, beta);
}

std::vector<ExperimentCell> ExperimentConfig::cells() const {
  std::vector<ExperimentCell> out;
  for (double beta : beta_levels) {
    const GameSpec game = spec(beta);
    for (std::uint64_t seed : seeds) {
      if (include_static) {
        ExperimentCell c;
        c.beta = beta;
        c.trajectory = build_trajectory(game, TrajectoryKind::kStatic, targets, offset);
        c.window_length = 0;
        c.agent = agent;
        c.seed = seed;
        out.push_back(std::move(c));
      }
      for (TrajectoryKind kind : trajectories) {
        if (kind == TrajectoryKind::kStatic) continue;
        const PriceSequence seq = build_trajectory(game, kind, targets, offset);
        for (int window : windows) {
          ExperimentCell c;
          c.beta = beta;
          c.trajectory = seq;
          c.window_length = window;
          c.repeats = repeats;
          c.agent = agent;
          c.seed = seed;
          out.push_back(std::move(c));
        }
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), cell_less);
  std::vector<std::string> dupes;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].key() == out[i - 1].key()) dupes.push_back("duplicate cell " + out[i].key());
  }
  if (!dupes.empty()) throw ConfigError(std::move(dupes));
  return out;
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["population"] = population;
  if (!types.empty()) j["types"] = types;
  j["beta_levels"] = beta_levels;
  j["targets"] = targets;
  j["include_static"] = include_static;
  j["trajectories"] = Json::array();
  for (auto k : trajectories) j["trajectories"].push_back(std::string(to_string(k)));
  j["windows"] = windows;
  j["repeats"] = repeats;
  j["offset"] = offset;
  j["seeds"] = seeds;
  j["agent"] = std::string(agent_label(agent));
  if (const auto* h = std::get_if<HeuristicParams>(&agent)) j["heuristic"] = heuristic_to_json(*h);
  if (const auto* g = std::get_if<GatewayConfig>(&agent)) j["gateway"] = gateway_to_json(*g);
  j["output"] = {{"dir", output_dir}};
  j["record_timestamps"] = record_timestamps;
  j["threads"] = threads;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  Reader r(doc, "", problems);

  const bool has_population = doc.is_object() && doc.contains("population");
  r.get("population", c.population);
  r.get("types", c.types);
  r.get("beta_levels", c.beta_levels);
  r.get("targets", c.targets);
  r.get("include_static", c.include_static);
  std::vector<std::string> kinds;
  bool has_kinds = doc.is_object() && doc.contains("trajectories");
  r.get("trajectories", kinds);
  r.get("windows", c.windows);
  r.get("repeats", c.repeats);
  r.get("offset", c.offset);
  r.get("seeds", c.seeds);
  r.get("record_timestamps", c.record_timestamps);
  r.get("threads", c.threads);

  std::string agent = "rational";
  r.get("agent", agent);
  const Json* heuristic = r.child("heuristic");
  const Json* gateway = r.child("gateway");
  if (agent == "rational") {
    c.agent = RationalParams{};
  } else if (agent == "heuristic") {
    c.agent = heuristic_from(heuristic ? *heuristic : Json::object(), "heuristic", problems);
  } else if (agent == "gateway") {
    c.agent = gateway_from(gateway ? *gateway : Json::object(), "gateway", problems);
  } else {
    problems.push_back(fmt::format("agent: unknown kind '{}' (rational, heuristic, gateway)", agent));
  }
  if (heuristic && agent != "heuristic") {
    heuristic_from(*heuristic, "heuristic", problems);  // still validated
  }
  if (gateway && agent != "gateway") gateway_from(*gateway, "gateway", problems);

  if (const Json* out = r.child("output")) {
    Reader o(*out, "output", problems);
    o.get("dir", c.output_dir);
    o.reject_unknown();
  }
  r.reject_unknown();

  if (has_kinds) {
    c.trajectories.clear();
    for (const auto& k : kinds) {
      try {
        c.trajectories.push_back(parse_trajectory_kind(k));
      } catch (const Error& e) {
        problems.push_back(fmt::format("trajectories: {}", e.what()));
      }
    }
  }
  if (!c.types.empty()) {
    if (has_population && c.population != static_cast<int>(c.types.size())) {
      problems.push_back("population disagrees with the length of types");
    }
    c.population = static_cast<int>(c.types.size());
    if (!std::is_sorted(c.types.begin(), c.types.end()) ||
        std::adjacent_find(c.types.begin(), c.types.end()) != c.types.end()) {
      problems.push_back("types must be strictly increasing");
    }
  }
  if (c.population < 1) problems.push_back("population must be >= 1");
  if (c.beta_levels.empty()) problems.push_back("beta_levels is empty");
  for (double b : c.beta_levels) {
    if (!(b >= 0.0 && b < 1.0)) problems.push_back(fmt::format("beta_levels: {} outside [0, 1)", b));
  }
  if (c.targets.empty()) problems.push_back("targets is empty");
  for (int t : c.targets) {
    if (t < 0 || t > c.population) {
      problems.push_back(fmt::format("targets: {} outside [0, {}]", t, c.population));
    }
  }
  if (std::set<int>(c.targets.begin(), c.targets.end()).size() != c.targets.size()) {
    problems.push_back("targets contains duplicates");
  }
  for (int w : c.windows) {
    if (w < 0) problems.push_back(fmt::format("windows: {} is negative", w));
  }
  if (c.repeats < 1) problems.push_back("repeats must be >= 1");
  if (c.seeds.empty()) problems.push_back("seeds is empty");
  if (c.threads < 0) problems.push_back("threads must be >= 0");
  for (double b : c.beta_levels) {
    if (!(c.offset > 0.0 && c.offset < 1.0 - b)) {
      problems.push_back(fmt::format("offset {} outside (0, {}) for beta {}", c.offset, 1.0 - b, b));
    }
  }

  if (!problems.empty()) throw ConfigError(std::move(problems));
  try {
    (void)c.cells();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  }
  return c;
}

ExperimentConfig paper_profile() { return ExperimentConfig{}; }

ExperimentConfig extended_profile() {
  ExperimentConfig c;
  c.windows = {1, 7, 13};
  c.repeats = 3;
  return c;
}

FactorialResult run_factorial(const ExperimentConfig& config, const FactorialOptions& options) {
  const std::vector<ExperimentCell> cells = config.cells();
  const Json snapshot = config.to_json();
  const int n = static_cast<int>(cells.size());

  std::vector<std::optional<RunLog>> logs(cells.size());
  std::vector<std::optional<CellError>> errors(cells.size());

  auto run_one = [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const ExperimentCell& cell = cells[idx];
    const std::string started = config.record_timestamps ? utc_now() : std::string();
    try {
      const GameSpec game = config.spec(cell.beta);
      const auto agents = make_agents(cell.agent, game, cell.seed, options.transport);
      RunLog log = run_cell(cell, game, agents, options.round);
      log.config_snapshot = snapshot;
      if (config.record_timestamps) {
        log.started_at = started;
        log.finished_at = utc_now();
      }
      logs[idx] = std::move(log);
    } catch (const CellFailure& f) {
      RunLog partial = f.partial();
      partial.config_snapshot = snapshot;
      errors[idx] = CellError{cell.key(), f.what(), std::move(partial)};
    } catch (const std::exception& e) {
      RunLog partial;
      partial.cell = cell;
      partial.failure = e.what();
      partial.config_snapshot = snapshot;
      errors[idx] = CellError{cell.key(), e.what(), std::move(partial)};
    }
  };

  if (options.execution == Execution::kSerial) {
    for (int i = 0; i < n; ++i) run_one(i);
  } else {
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (int i = 0; i < n; ++i) run_one(i);
  }

  FactorialResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (logs[i]) result.logs.push_back(std::move(*logs[i]));
    if (errors[i]) result.failures.push_back(std::move(*errors[i]));
  }
  return result;
}

}  // namespace feesim
