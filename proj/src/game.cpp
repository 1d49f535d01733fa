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

#include "feesim/game.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace feesim {

std::string_view to_string(Action action) {
  return action == Action::kAttend ? "attend" : "not_attend";
}

Action parse_action(std::string_view text) {
  if (text == "attend") return Action::kAttend;
  if (text == "not_attend") return Action::kNotAttend;
  throw InvalidArgument(fmt::format("unknown action '{}'", text));
}

Price::Price(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw InvalidArgument(fmt::format("price must be finite and >= 0, got {}", value));
  }
}

GameSpec::GameSpec(std::vector<double> types, double beta)
    : types_(std::move(types)), beta_(beta) {
  if (types_.empty()) throw InvalidArgument("population must be at least 1");
  if (!std::isfinite(beta_) || beta_ < 0.0) {
    throw InvalidArgument(fmt::format("beta must be finite and >= 0, got {}", beta_));
  }
  for (double t : types_) {
    if (!std::isfinite(t)) throw InvalidArgument("types must be finite");
  }
  if (!std::is_sorted(types_.begin(), types_.end())) {
    throw InvalidArgument("types must be sorted non-decreasing");
  }
}

GameSpec GameSpec::integer_grid(int population, double beta) {
  if (population < 1) throw InvalidArgument("population must be at least 1");
  std::vector<double> types(static_cast<std::size_t>(population));
  for (int i = 0; i < population; ++i) types[static_cast<std::size_t>(i)] = i;
  return GameSpec(std::move(types), beta);
}

bool GameSpec::strictly_sorted() const {
  return std::adjacent_find(types_.begin(), types_.end(),
                            [](double a, double b) { return !(a < b); }) ==
         types_.end();
}

double utility(double theta, double beta, int expected_total, Price price) {
  return theta + beta * expected_total - price.value();
}

Action best_response(double theta, double beta, int expected_total, Price price) {
  return utility(theta, beta, expected_total, price) >= 0.0 ? Action::kAttend
                                                            : Action::kNotAttend;
}

int demand(const GameSpec& spec, Price price, int expected_total) {
  // Rounding is monotone, so the attend predicate flips at most once along
  // the sorted types; binary search gives the same count as a full scan.
  auto types = spec.types();
  auto first_attendee = std::partition_point(
      types.begin(), types.end(), [&](double theta) {
        return best_response(theta, spec.beta(), expected_total, price) ==
               Action::kNotAttend;
      });
  return static_cast<int>(types.end() - first_attendee);
}

EquilibriumSolution solve_fee(const GameSpec& spec, Price price) {
  EquilibriumSolution out;
  out.price = price;
  for (int n = 0; n <= spec.population(); ++n) {
    if (demand(spec, price, n) == n) out.fixed_points.push_back(n);
  }
  if (out.fixed_points.empty()) {
    throw NoEquilibrium(fmt::format("no fulfilled-expectation count at price {}",
                                    price.value()));
  }
  out.selected = out.fixed_points.back();
  return out;
}

PriceInterval equilibrium_price_interval(const GameSpec& spec, int target_n) {
  const int k = spec.population();
  if (target_n < 0 || target_n > k) {
    throw InvalidArgument(fmt::format("target count {} outside [0, {}]", target_n, k));
  }
  if (!spec.strictly_sorted()) {
    throw InvalidArgument("price intervals need strictly sorted (distinct) types");
  }
  auto types = spec.types();
  const double shift = spec.beta() * target_n;
  PriceInterval iv;
  if (target_n == 0) {
    iv.lower = types.back();
    iv.upper = iv.lower + 1.0;
  } else if (target_n == k) {
    iv.upper = types.front() + shift;
    iv.lower = iv.upper - 1.0;
  } else {
    const auto marginal = static_cast<std::size_t>(k - target_n);
    iv.lower = types[marginal - 1] + shift;
    iv.upper = types[marginal] + shift;
  }
  return iv;
}

Price make_price(const GameSpec& spec, int target_n, double offset) {
  if (spec.beta() >= 1.0) {
    throw InvalidArgument("designed prices need beta < 1");
  }
  if (!(offset > 0.0 && offset < 1.0 - spec.beta())) {
    throw InvalidArgument(fmt::format("offset {} outside (0, {})", offset, 1.0 - spec.beta()));
  }
  const PriceInterval iv = equilibrium_price_interval(spec, target_n);
  if (!(offset < iv.width())) {
    throw InvalidArgument(fmt::format(
        "offset {} does not fit the price interval ({}, {}]", offset, iv.lower, iv.upper));
  }
  const double value = iv.upper - offset;
  if (value < 0.0) {
    throw InvalidArgument(fmt::format(
        "designed price for n={} would be negative ({})", target_n, value));
  }
  const Price price(value);
  const int selected = solve_fee(spec, price).selected;
  if (selected != target_n) {
    throw InvalidArgument(fmt::format(
        "price {} selects n={} instead of the target n={}", value, selected, target_n));
  }
  return price;
}

}  // namespace feesim
