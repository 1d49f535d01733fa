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

#ifndef FEESIM_TOOLS_COMMANDS_HPP_
#define FEESIM_TOOLS_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace feesim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Parses and executes one command line. Normal output goes to `out`,
// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Accepts "a..b" (integer range, inclusive) or a comma/space separated list.
std::vector<double> parse_types(const std::string& text);

}  // namespace feesim::cli

#endif  // FEESIM_TOOLS_COMMANDS_HPP_
