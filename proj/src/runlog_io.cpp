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

#include "feesim/runlog_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "feesim/experiment.hpp"

namespace feesim {

namespace {

using Json = nlohmann::json;

Json cell_to_json(const ExperimentCell& c) {
  Json prices = Json::array();
  for (Price p : c.trajectory.prices) prices.push_back(p.value());
  return {{"key", c.key()},
          {"beta", c.beta},
          {"path", std::string(to_string(c.trajectory.kind))},
          {"window", c.window_length},
          {"repeats", c.repeats},
          {"seed", c.seed},
          {"agent", agent_kind_to_json(c.agent)},
          {"prices", prices},
          {"targets", c.trajectory.target_counts}};
}

ExperimentCell cell_from_json(const Json& j) {
  ExperimentCell c;
  c.beta = j.at("beta").get<double>();
  c.trajectory.kind = parse_trajectory_kind(j.at("path").get<std::string>());
  for (double p : j.at("prices")) c.trajectory.prices.emplace_back(p);
  c.trajectory.target_counts = j.at("targets").get<std::vector<int>>();
  c.window_length = j.at("window").get<int>();
  c.repeats = j.at("repeats").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.agent = agent_kind_from_json(j.at("agent"));
  return c;
}

Json round_to_json(const RoundRecord& r) {
  Json agents = Json::array();
  for (const auto& a : r.agents) {
    Json rec = {{"id", a.agent_id},
                {"theta", a.theta},
                {"expected_total", a.decision.expected_total},
                {"action", std::string(to_string(a.decision.action))},
                {"payoff", a.payoff}};
    if (a.decision.rationale) rec["rationale"] = *a.decision.rationale;
    if (a.decision.clamped_from) rec["clamped_from"] = *a.decision.clamped_from;
    agents.push_back(std::move(rec));
  }
  return {{"record", "round"},
          {"round", r.round_index},
          {"price", r.price.value()},
          {"realized_total", r.realized_total},
          {"agents", std::move(agents)}};
}

RoundRecord round_from_json(const Json& j) {
  RoundRecord r;
  r.round_index = j.at("round").get<int>();
  r.price = Price(j.at("price").get<double>());
  r.realized_total = j.at("realized_total").get<int>();
  int attends = 0;
  for (const auto& a : j.at("agents")) {
    AgentRecord rec;
    rec.agent_id = a.at("id").get<int>();
    rec.theta = a.at("theta").get<double>();
    rec.decision.expected_total = a.at("expected_total").get<int>();
    rec.decision.action = parse_action(a.at("action").get<std::string>());
    rec.payoff = a.at("payoff").get<double>();
    if (a.contains("rationale")) rec.decision.rationale = a["rationale"].get<std::string>();
    if (a.contains("clamped_from")) rec.decision.clamped_from = a["clamped_from"].get<std::int64_t>();
    if (rec.decision.action == Action::kAttend) ++attends;
    r.agents.push_back(std::move(rec));
  }
  if (attends != r.realized_total) {
    throw SchemaError(fmt::format("round {}: realized_total {} but {} attend actions",
                                  r.round_index, r.realized_total, attends));
  }
  return r;
}

}  // namespace

void write_runlog(std::ostream& out, const RunLog& log) {
  Json header = {{"record", "header"},
                 {"schema", std::string(kRunLogSchema)},
                 {"version", log.schema_version},
                 {"cell", cell_to_json(log.cell)},
                 {"types", log.types},
                 {"config", log.config_snapshot}};
  if (log.started_at) header["started_at"] = *log.started_at;
  out << header.dump() << '\n';
  for (const auto& r : log.rounds) out << round_to_json(r).dump() << '\n';

  Json traces = Json::array();
  for (const auto& t : log.traces) {
    Json states = Json::array();
    for (FsmState s : t) states.push_back(std::string(to_string(s)));
    traces.push_back(std::move(states));
  }
  Json trailer = {{"record", "trailer"},
                  {"status", log.ok() ? "ok" : "failed"},
                  {"rounds", log.rounds.size()},
                  {"traces", std::move(traces)}};
  if (log.failure) trailer["error"] = *log.failure;
  if (log.finished_at) trailer["finished_at"] = *log.finished_at;
  out << trailer.dump() << '\n';
}

std::string runlog_to_string(const RunLog& log) {
  std::ostringstream out;
  write_runlog(out, log);
  return out.str();
}

RunLog read_runlog(std::istream& in) {
  RunLog log;
  bool have_header = false;
  bool have_trailer = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (have_trailer) throw SchemaError(fmt::format("line {}: data after trailer", line_no));
    const Json j = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      throw SchemaError(fmt::format("line {}: not a JSON object", line_no));
    }
    const std::string kind = j.value("record", "");
    try {
      if (kind == "header") {
        if (j.value("schema", "") != kRunLogSchema) {
          throw SchemaError(fmt::format("not a run log (schema '{}')", j.value("schema", "")));
        }
        const int version = j.value("version", -1);
        if (version != kRunLogSchemaVersion) {
          throw SchemaError(fmt::format("run log schema version {} (this build reads {})",
                                        version, kRunLogSchemaVersion));
        }
        log.schema_version = version;
        log.cell = cell_from_json(j.at("cell"));
        log.types = j.at("types").get<std::vector<double>>();
        log.config_snapshot = j.value("config", Json::object());
        if (j.contains("started_at")) log.started_at = j["started_at"].get<std::string>();
        have_header = true;
      } else if (!have_header) {
        throw SchemaError(fmt::format("line {}: record before header", line_no));
      } else if (kind == "round") {
        log.rounds.push_back(round_from_json(j));
      } else if (kind == "trailer") {
        for (const auto& t : j.at("traces")) {
          std::vector<FsmState> states;
          for (const auto& s : t) states.push_back(parse_fsm_state(s.get<std::string>()));
          log.traces.push_back(std::move(states));
        }
        if (j.value("status", "") != "ok") log.failure = j.value("error", "failed");
        if (j.contains("finished_at")) log.finished_at = j["finished_at"].get<std::string>();
        if (j.at("rounds").get<std::size_t>() != log.rounds.size()) {
          throw SchemaError("trailer round count disagrees with the round records");
        }
        have_trailer = true;
      } else {
        throw SchemaError(fmt::format("line {}: unknown record '{}'", line_no, kind));
      }
    } catch (const Json::exception& e) {
      throw SchemaError(fmt::format("line {}: {}", line_no, e.what()));
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      throw SchemaError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw SchemaError("run log has no header");
  if (!have_trailer) throw SchemaError("run log has no trailer (truncated?)");
  return log;
}

RunLog load_runlog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  try {
    return read_runlog(in);
  } catch (const SchemaError& e) {
    throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(fmt::format("write to {} failed", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

std::string runlog_file_name(const ExperimentCell& cell) {
  std::string name = cell.key();
  for (char& c : name) {
    if (c == '/') c = '_';
    else if (c == '=') c = '-';
  }
  return name + ".jsonl";
}

}  // namespace feesim
