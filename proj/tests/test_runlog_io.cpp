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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "feesim/errors.hpp"
#include "feesim/experiment.hpp"
#include "feesim/runlog_io.hpp"

namespace feesim {
namespace {

namespace fs = std::filesystem;

RunLog sample_log() {
  ExperimentConfig c;
  c.beta_levels = {0.75};
  c.include_static = false;
  c.trajectories = {TrajectoryKind::kConverging};
  c.windows = {3};
  HeuristicParams hp;
  hp.anchor_weight = 0.5;
  hp.dispersion = 4.0;
  c.agent = hp;
  c.record_timestamps = true;
  auto result = run_factorial(c);
  REQUIRE(result.logs.size() == 1);
  return result.logs.front();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

RunLog parse(const std::string& text) {
  std::istringstream in(text);
  return read_runlog(in);
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

TEST_SUITE("runlog") {

TEST_CASE("round trip") {
  const auto log = sample_log();
  const auto text = runlog_to_string(log);
  const auto back = parse(text);
  CHECK(back.cell.key() == log.cell.key());
  CHECK(back.cell.trajectory.prices == log.cell.trajectory.prices);
  CHECK(back.cell.trajectory.target_counts == log.cell.trajectory.target_counts);
  CHECK(back.types == log.types);
  CHECK(back.rounds == log.rounds);
  CHECK(back.traces == log.traces);
  CHECK(back.config_snapshot == log.config_snapshot);
  CHECK(back.started_at == log.started_at);
  CHECK(back.finished_at == log.finished_at);
  CHECK(back.ok());
  CHECK(runlog_to_string(back) == text);
  CHECK(lines_of(text).size() == 1 + 6 + 1);
}

TEST_CASE("failed logs keep their error") {
  auto log = sample_log();
  log.rounds.resize(2);
  log.failure = "agent 3: timed out";
  const auto back = parse(runlog_to_string(log));
  CHECK_FALSE(back.ok());
  CHECK(back.failure == log.failure);
  CHECK(back.rounds.size() == 2);
}

TEST_CASE("malformed logs are rejected") {
  const auto lines = lines_of(runlog_to_string(sample_log()));

  SUBCASE("version mismatch") {
    auto edited = lines;
    const auto pos = edited[0].find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    edited[0].replace(pos, 11, "\"version\":99");
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("missing trailer") {
    auto edited = lines;
    edited.pop_back();
    try {
      parse(join(edited));
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("trailer") != std::string::npos);
    }
  }
  SUBCASE("missing header") {
    auto edited = lines;
    edited.erase(edited.begin());
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("realized total disagrees with actions") {
    auto edited = lines;
    auto j = nlohmann::json::parse(edited[1]);
    j["realized_total"] = j["realized_total"].get<int>() + 1;
    edited[1] = j.dump();
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("trailer round count") {
    auto edited = lines;
    edited.erase(edited.begin() + 3);
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("garbage line") {
    auto edited = lines;
    edited.insert(edited.begin() + 2, "{not json");
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("unknown record") {
    auto edited = lines;
    edited.insert(edited.begin() + 2, R"({"record":"mystery"})");
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("data after trailer") {
    auto edited = lines;
    edited.push_back(lines[1]);
    CHECK_THROWS_AS(parse(join(edited)), SchemaError);
  }
  SUBCASE("different schema") {
    CHECK_THROWS_AS(parse(R"({"record":"header","schema":"other"})" "\n"), SchemaError);
  }
}

TEST_CASE("file names and atomic writes") {
  const auto log = sample_log();
  CHECK(runlog_file_name(log.cell) ==
        "beta-0.75_path-converging_window-3_agent-heuristic_seed-1.jsonl");

  const auto dir = fs::temp_directory_path() / "feesim_runlog_test";
  fs::remove_all(dir);
  const auto path = dir / "nested" / runlog_file_name(log.cell);
  write_file_atomic(path, runlog_to_string(log));
  CHECK(fs::exists(path));
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  CHECK(load_runlog(path).rounds == log.rounds);
  write_file_atomic(path, "short\n");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  CHECK(content == "short\n");
  try {
    load_runlog(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find(path.filename().string()) != std::string::npos);
  }
  CHECK_THROWS_AS(load_runlog(dir / "absent.jsonl"), Error);
  fs::remove_all(dir);
}

}  // TEST_SUITE

}  // namespace
}  // namespace feesim
