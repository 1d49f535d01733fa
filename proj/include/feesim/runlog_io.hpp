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

#ifndef FEESIM_RUNLOG_IO_HPP_
#define FEESIM_RUNLOG_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "feesim/orchestrator.hpp"

namespace feesim {

inline constexpr std::string_view kRunLogSchema = "feesim.runlog";

// Line-delimited JSON: one header record, one record per round, one
// trailer. Output is a pure function of the RunLog.
void write_runlog(std::ostream& out, const RunLog& log);
std::string runlog_to_string(const RunLog& log);

// Throws SchemaError on a wrong schema name or version, a missing header
// or trailer, or a round whose realized_total disagrees with its actions.
RunLog read_runlog(std::istream& in);
RunLog load_runlog(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// "beta=0.25/path=static/..." -> "beta-0.25_path-static_..." + ".jsonl"
std::string runlog_file_name(const ExperimentCell& cell);

}  // namespace feesim

#endif  // FEESIM_RUNLOG_IO_HPP_
