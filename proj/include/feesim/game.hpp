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

#ifndef FEESIM_GAME_HPP_
#define FEESIM_GAME_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "feesim/errors.hpp"

namespace feesim {

enum class Action { kAttend, kNotAttend };

std::string_view to_string(Action action);
Action parse_action(std::string_view text);

// A non-negative, finite posted price in utility units.
class Price {
 public:
  Price() = default;
  explicit Price(double value);

  double value() const { return value_; }

  friend bool operator==(Price, Price) = default;
  friend auto operator<=>(Price, Price) = default;

 private:
  double value_ = 0.0;
};

// The immutable game definition: sorted standalone values and a common
// network strength. The population size is the number of types.
//
// N in the utility is the expected TOTAL participation (the fixed-point
// variable), not "others". That reading is the one under which the
// six-scholar example and the 50-agent designed prices agree.
class GameSpec {
 public:
  GameSpec(std::vector<double> types, double beta);

  // Types {0, 1, ..., population-1}.
  static GameSpec integer_grid(int population, double beta);

  std::span<const double> types() const { return types_; }
  double beta() const { return beta_; }
  int population() const { return static_cast<int>(types_.size()); }
  double max_type() const { return types_.back(); }

  // True when every type is strictly greater than its predecessor.
  bool strictly_sorted() const;

 private:
  std::vector<double> types_;
  double beta_;
};

double utility(double theta, double beta, int expected_total, Price price);

// Attend iff utility >= 0; a zero payoff attends.
Action best_response(double theta, double beta, int expected_total, Price price);

// Number of agents whose utility is non-negative when everyone expects
// `expected_total` participants.
int demand(const GameSpec& spec, Price price, int expected_total);

struct EquilibriumSolution {
  Price price;
  std::vector<int> fixed_points;  // ascending
  int selected = 0;               // largest fixed point
};

// Exhaustive scan of n in [0, K] for demand(n) == n.
EquilibriumSolution solve_fee(const GameSpec& spec, Price price);

// Prices p in (lower, upper] at which demand(p, n) == n.
struct PriceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

// Requires strictly sorted types. For n == 0 the true interval is
// unbounded above; it is capped to width one, and for n == K (unbounded
// below) the same cap is applied downward.
PriceInterval equilibrium_price_interval(const GameSpec& spec, int target_n);

inline constexpr double kDefaultPriceOffset = 0.01;

// upper - offset, verified to select target_n. Requires beta < 1 and
// offset in (0, 1 - beta).
Price make_price(const GameSpec& spec, int target_n,
                 double offset = kDefaultPriceOffset);

}  // namespace feesim

#endif  // FEESIM_GAME_HPP_
