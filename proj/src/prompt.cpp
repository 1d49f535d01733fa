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

#include "feesim/prompt.hpp"

#include <array>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "json.hpp"

namespace feesim {

const PromptTemplate& default_prompt_template() {
  static const PromptTemplate tmpl{
      // system
      "You are participant {{agent_id}} in a group of {{population}} people, each "
      "deciding whether to attend an event. Your private standalone value of "
      "attending is {{theta}}. Everyone's payoff from attending is "
      "{{utility}}, where theta is their own standalone value, beta = {{beta}} is "
      "the network-effect strength, N is the total number of attendees (you "
      "included) and p is the price. Not attending pays 0. Other participants' "
      "standalone values are private to them.",
      // user
      "Round {{round}}. The price is {{price}}.\n"
      "{{history}}\n"
      "Predict how many of the {{population}} participants (including you) will "
      "attend at this price, then decide whether to attend. Reply with JSON "
      "only: {\"expected_total\": <integer>, \"action\": \"attend\" or "
      "\"not_attend\", \"rationale\": <short string>}."};
  return tmpl;
}

namespace {

constexpr std::array<std::string_view, 6> kRequiredPlaceholders = {
    "theta", "beta", "population", "price", "utility", "history"};

std::string history_block(const Observation& obs) {
  if (obs.visible_history.empty()) return "No history available: this is the first round you can see.";
  std::string out = "History of previous rounds (oldest first):";
  for (const auto& h : obs.visible_history) {
    out += fmt::format(
        "\n- Round {}: price {:.2f}, {} participants attended; you expected {}, "
        "you chose to {}, your payoff was {:.2f}.",
        h.round_index + 1, h.price.value(), h.realized_total, h.own_expectation,
        h.own_action == Action::kAttend ? "attend" : "not attend", h.own_payoff);
  }
  return out;
}

// Replaces {{name}} tokens; throws on unknown names.
std::string substitute(std::string_view text, const std::map<std::string_view, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    const auto name = text.substr(open + 2, close - open - 2);
    auto it = values.find(name);
    if (it == values.end()) {
      throw InvalidArgument(fmt::format("unknown prompt placeholder '{{{{{}}}}}'", name));
    }
    out += it->second;
    pos = close + 2;
  }
  out.append(text.substr(pos));
  return out;
}

bool mentions(const PromptTemplate& tmpl, std::string_view name) {
  const std::string token = fmt::format("{{{{{}}}}}", name);
  return tmpl.system.find(token) != std::string::npos ||
         tmpl.user.find(token) != std::string::npos;
}

}  // namespace

RenderedPrompt render_prompt(const Observation& obs, const PromptTemplate& tmpl) {
  std::vector<std::string_view> missing;
  for (auto name : kRequiredPlaceholders) {
    if (!mentions(tmpl, name)) missing.push_back(name);
  }
  if (!missing.empty()) {
    throw InvalidArgument(fmt::format("prompt template lacks placeholder(s): {}",
                                      fmt::join(missing, ", ")));
  }
  const std::map<std::string_view, std::string> values = {
      {"agent_id", fmt::format("{}", obs.agent_id)},
      {"theta", fmt::format("{}", obs.agent_theta)},
      {"beta", fmt::format("{}", obs.beta)},
      {"population", fmt::format("{}", obs.population)},
      {"price", fmt::format("{:.2f}", obs.price.value())},
      {"utility", obs.utility_definition},
      {"round", fmt::format("{}", obs.round_index + 1)},
      {"history", history_block(obs)},
  };
  return {substitute(tmpl.system, values), substitute(tmpl.user, values)};
}

namespace {

// Candidate {...} spans, brace-balanced outside string literals.
std::vector<std::string_view> object_candidates(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        out.push_back(text.substr(start, i - start + 1));
        break;
      }
    }
  }
  return out;
}

// Empty string when `obj` conforms; otherwise the reason it does not.
std::string schema_problem(const nlohmann::json& obj) {
  if (!obj.is_object()) return "reply is not a JSON object";
  auto total = obj.find("expected_total");
  if (total == obj.end()) return "missing required field 'expected_total'";
  if (!total->is_number_integer()) return "'expected_total' must be an integer";
  auto action = obj.find("action");
  if (action == obj.end()) return "missing required field 'action'";
  if (!action->is_string()) return "'action' must be a string";
  const auto& a = action->get_ref<const std::string&>();
  if (a != "attend" && a != "not_attend") {
    return fmt::format("'action' must be \"attend\" or \"not_attend\", got \"{}\"", a);
  }
  auto rationale = obj.find("rationale");
  if (rationale != obj.end() && !rationale->is_string()) return "'rationale' must be a string";
  return {};
}

}  // namespace

Decision parse_reply(std::string_view text, int population, ReplyOptions options) {
  std::string first_problem;
  bool saw_json = false;
  for (auto candidate : object_candidates(text)) {
    auto obj = nlohmann::json::parse(candidate, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) continue;
    saw_json = true;
    if (auto problem = schema_problem(obj); !problem.empty()) {
      if (first_problem.empty()) first_problem = std::move(problem);
      continue;
    }

    Decision d;
    const auto& total = obj.at("expected_total");
    std::int64_t raw;
    if (total.is_number_unsigned()) {
      const auto u = total.get<std::uint64_t>();
      raw = u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())
                ? std::numeric_limits<std::int64_t>::max()
                : static_cast<std::int64_t>(u);
    } else {
      raw = total.get<std::int64_t>();
    }
    if (raw < 0 || raw > population) {
      if (!options.clamp) {
        throw ReplyError(ReplyError::Kind::kOutOfRange,
                         fmt::format("expected_total {} outside [0, {}]", raw, population));
      }
      d.clamped_from = raw;
      raw = raw < 0 ? 0 : population;
    }
    d.expected_total = static_cast<int>(raw);
    d.action = parse_action(obj.at("action").get<std::string>());
    if (auto r = obj.find("rationale"); r != obj.end()) d.rationale = r->get<std::string>();
    return d;
  }
  if (!saw_json) throw ReplyError(ReplyError::Kind::kNoJsonFound, "no JSON object in reply");
  throw ReplyError(ReplyError::Kind::kSchemaViolation, "reply violates schema: " + first_problem);
}

}  // namespace feesim
