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

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "doctest.h"
#include "feesim/errors.hpp"
#include "feesim/game.hpp"
#include "support/oracles.hpp"

namespace feesim {
namespace {

std::vector<double> scholars() { return {1, 2, 3, 4, 5, 6}; }

TEST_SUITE("game") {

TEST_CASE("utility and best response") {
  CHECK(utility(2, 0.5, 4, Price(4.4)) == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(utility(3, 0.5, 4, Price(4.4)) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(utility(0, 0, 0, Price(0)) == 0.0);
  CHECK(best_response(2, 0.5, 4, Price(4.4)) == Action::kNotAttend);
  CHECK(best_response(3, 0.5, 4, Price(4.4)) == Action::kAttend);
  CHECK(best_response(0, 0, 0, Price(0)) == Action::kAttend);
}

TEST_CASE("action strings round trip") {
  CHECK(to_string(Action::kAttend) == "attend");
  CHECK(to_string(Action::kNotAttend) == "not_attend");
  CHECK(parse_action("attend") == Action::kAttend);
  CHECK(parse_action("not_attend") == Action::kNotAttend);
  CHECK_THROWS_AS(parse_action("maybe"), InvalidArgument);
}

TEST_CASE("price validation") {
  CHECK_THROWS_AS(Price(-0.01), InvalidArgument);
  CHECK_THROWS_AS(Price(NAN), InvalidArgument);
  CHECK_THROWS_AS(Price(std::numeric_limits<double>::infinity()), InvalidArgument);
  CHECK(Price(0).value() == 0.0);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(GameSpec({}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(GameSpec({2, 1}, 0.5), InvalidArgument);
  CHECK_THROWS_AS(GameSpec({1, 2}, -0.1), InvalidArgument);
  CHECK_NOTHROW(GameSpec({1, 1, 2}, 1.5));
  CHECK_FALSE(GameSpec({1, 1, 2}, 0.5).strictly_sorted());
  const auto grid = GameSpec::integer_grid(50, 0.25);
  CHECK(grid.population() == 50);
  CHECK(grid.types().front() == 0.0);
  CHECK(grid.max_type() == 49.0);
}

TEST_CASE("demand examples") {
  CHECK(demand(GameSpec(scholars(), 0.5), Price(4.4), 4) == 4);
  CHECK(demand(GameSpec::integer_grid(50, 0.25), Price(42.49), 10) == 10);
  CHECK(demand(GameSpec::integer_grid(50, 0.0), Price(0), 0) == 50);
}

TEST_CASE("worked example: scholars 3-6 form a fulfilled expectation") {
  const GameSpec spec(scholars(), 0.5);
  const auto sol = solve_fee(spec, Price(4.4));
  // N counts the agent itself, so n=5 (scholars 2-6) is also self-fulfilling.
  CHECK(sol.fixed_points == std::vector<int>{4, 5});
  CHECK(sol.selected == 5);
  std::vector<double> attendees;
  for (double t : spec.types()) {
    if (best_response(t, 0.5, 4, Price(4.4)) == Action::kAttend) attendees.push_back(t);
  }
  CHECK(attendees == std::vector<double>{3, 4, 5, 6});
}

TEST_CASE("solve_fee examples on the 50-agent grid") {
  const auto low = GameSpec::integer_grid(50, 0.25);
  CHECK(solve_fee(low, Price(19.99)).selected == 40);
  const auto sol = solve_fee(low, Price(42.49));
  CHECK(sol.fixed_points == std::vector<int>{9, 10});
  CHECK(sol.selected == 10);
  CHECK(solve_fee(GameSpec::integer_grid(50, 0.0), Price(1000)).selected == 0);
  CHECK(solve_fee(low, Price(42.99)).selected == 9);
}

TEST_CASE("solver matches brute force on random instances") {
  testing::Rng rng(20260101);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = rng.uniform_int(1, 200);
    std::vector<double> types(static_cast<std::size_t>(k));
    const bool integer = rng.uniform() < 0.5;
    for (auto& t : types) t = integer ? rng.uniform_int(0, 60) : rng.uniform(-5, 60);
    std::sort(types.begin(), types.end());
    const double beta = rng.uniform(0, 1.5);
    const double price = rng.uniform(0, 120);
    const auto sol = solve_fee(GameSpec(types, beta), Price(price));
    const auto expected = testing::brute_force_fixed_points(types, beta, price);
    REQUIRE(sol.fixed_points == expected);
    CHECK(sol.selected == expected.back());
    for (int n : sol.fixed_points) CHECK(demand(GameSpec(types, beta), Price(price), n) == n);
  }
}

TEST_CASE("fixed points exist across a fine price sweep") {
  for (double beta : {0.0, 0.25, 0.5, 0.75, 0.99}) {
    const auto spec = GameSpec::integer_grid(50, beta);
    for (int step = 0; step <= 12000; ++step) {
      const auto sol = solve_fee(spec, Price(step * 0.01));
      REQUIRE_FALSE(sol.fixed_points.empty());
    }
  }
}

TEST_CASE("selection is monotone in price and beta") {
  const std::vector<double> betas = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9};
  for (double beta : betas) {
    const auto spec = GameSpec::integer_grid(50, beta);
    int previous = 51;
    for (int step = 0; step <= 2000; ++step) {
      const int s = solve_fee(spec, Price(step * 0.05)).selected;
      REQUIRE(s <= previous);
      previous = s;
    }
  }
  for (int step = 0; step <= 400; ++step) {
    const Price p(step * 0.25);
    int previous = -1;
    for (double beta : betas) {
      const int s = solve_fee(GameSpec::integer_grid(50, beta), p).selected;
      REQUIRE(s >= previous);
      previous = s;
    }
  }
}

TEST_CASE("scaling types, beta and price together leaves the solution unchanged") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = rng.uniform_int(1, 80);
    std::vector<double> types(static_cast<std::size_t>(k));
    for (auto& t : types) t = rng.uniform_int(0, 40);
    std::sort(types.begin(), types.end());
    const double beta = rng.uniform_int(0, 8) * 0.125;
    const double price = rng.uniform_int(0, 400) * 0.125;
    const double c = std::ldexp(1.0, rng.uniform_int(-3, 3));  // exact scaling
    std::vector<double> scaled = types;
    for (auto& t : scaled) t *= c;
    const auto a = solve_fee(GameSpec(types, beta), Price(price));
    const auto b = solve_fee(GameSpec(scaled, beta * c), Price(price * c));
    CHECK(a.fixed_points == b.fixed_points);
    CHECK(a.selected == b.selected);
  }
}

TEST_CASE("price intervals") {
  const auto low = GameSpec::integer_grid(50, 0.25);
  const auto high = GameSpec::integer_grid(50, 0.75);
  CHECK(equilibrium_price_interval(low, 50).upper == 12.5);
  CHECK(equilibrium_price_interval(high, 10).upper == 47.5);
  CHECK(equilibrium_price_interval(GameSpec::integer_grid(50, 0.0), 50).upper == 0.0);
  const auto zero = equilibrium_price_interval(low, 0);
  CHECK(zero.lower == 49.0);
  CHECK(zero.upper == 50.0);
  for (double beta : {0.0, 0.25, 0.5, 0.75}) {
    const auto spec = GameSpec::integer_grid(50, beta);
    for (int n = 1; n < 50; ++n) {
      const auto iv = equilibrium_price_interval(spec, n);
      CHECK(iv.width() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(iv.lower == doctest::Approx((49.0 - n) + beta * n).epsilon(1e-12));
      CHECK(demand(spec, Price(iv.upper), n) == n);
      CHECK(demand(spec, Price(iv.lower + 1e-9), n) == n);
      CHECK(demand(spec, Price(iv.lower), n) != n);
      // n stays the maximal fixed point on the top 1 - beta of the interval.
      const double cut = iv.upper - (1.0 - beta);
      CHECK(solve_fee(spec, Price(cut + 1e-9)).selected == n);
      if (beta > 0.0) CHECK(solve_fee(spec, Price(cut - 1e-9)).selected > n);
    }
  }
  CHECK_THROWS_AS(equilibrium_price_interval(low, 51), InvalidArgument);
  CHECK_THROWS_AS(equilibrium_price_interval(low, -1), InvalidArgument);
  CHECK_THROWS_AS(equilibrium_price_interval(GameSpec({1, 1, 2}, 0.25), 1), InvalidArgument);
}

TEST_CASE("designed prices") {
  const auto low = GameSpec::integer_grid(50, 0.25);
  const auto high = GameSpec::integer_grid(50, 0.75);
  CHECK(make_price(low, 50).value() == doctest::Approx(12.49).epsilon(1e-12));
  CHECK(make_price(high, 20).value() == doctest::Approx(44.99).epsilon(1e-12));
  CHECK(make_price(low, 10).value() == doctest::Approx(42.49).epsilon(1e-12));
  for (const auto* spec : {&low, &high}) {
    for (int n : {0, 10, 20, 30, 40, 50}) CHECK(solve_fee(*spec, make_price(*spec, n)).selected == n);
  }
  CHECK_THROWS_AS(make_price(low, 10, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_price(low, 10, 0.75), InvalidArgument);
  CHECK_THROWS_AS(make_price(high, 10, 0.3), InvalidArgument);
  CHECK_THROWS_AS(make_price(GameSpec::integer_grid(50, 1.0), 10), InvalidArgument);
}

TEST_CASE("designed prices round trip for every target on random grids") {
  testing::Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = rng.uniform_int(1, 120);
    const double beta = rng.uniform(0, 0.95);
    const auto spec = GameSpec::integer_grid(k, beta);
    const double offset = rng.uniform(0.001, 0.999) * (1.0 - beta);
    for (int n = 0; n <= k; ++n) {
      std::optional<Price> p;
      try {
        p = make_price(spec, n, offset);
      } catch (const InvalidArgument&) {
        // The n=K price can fall below zero; that is reported, not fabricated.
        CHECK(n == k);
        CHECK(beta * k - offset < 0.0);
        continue;
      }
      REQUIRE(solve_fee(spec, *p).selected == n);
    }
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace feesim
