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

#ifndef FEESIM_PROMPT_HPP_
#define FEESIM_PROMPT_HPP_

#include <string>
#include <string_view>

#include "feesim/agents.hpp"

namespace feesim {

// Shipped default. Written for this tool; not the wording of any
// published experiment.
const PromptTemplate& default_prompt_template();

struct RenderedPrompt {
  std::string system;
  std::string user;
};

// Throws InvalidArgument when theta, beta, population, price, utility or
// history is missing from the template, or an unknown placeholder appears.
RenderedPrompt render_prompt(const Observation& obs, const PromptTemplate& tmpl);

class ReplyError : public Error {
 public:
  enum class Kind { kNoJsonFound, kSchemaViolation, kOutOfRange };
  ReplyError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct ReplyOptions {
  // Clamp out-of-range expectations (recording the raw value) instead of
  // throwing kOutOfRange.
  bool clamp = true;
};

// Extracts the first JSON object matching
//   {"expected_total": int, "action": "attend"|"not_attend", "rationale"?: string}
// from free text. Extra keys are ignored.
Decision parse_reply(std::string_view text, int population, ReplyOptions options = {});

}  // namespace feesim

#endif  // FEESIM_PROMPT_HPP_
