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

#include <string>
#include <vector>

#include <fmt/format.h>

#include "doctest.h"
#include "feesim/errors.hpp"
#include "feesim/trajectory.hpp"
#include "support/oracles.hpp"

namespace feesim {
namespace {

std::vector<std::string> formatted(const PriceSequence& seq) {
  std::vector<std::string> out;
  for (Price p : seq.prices) out.push_back(fmt::format("{:.2f}", p.value()));
  return out;
}

using Strings = std::vector<std::string>;

TEST_SUITE("trajectory") {

TEST_CASE("kind names round trip") {
  for (TrajectoryKind k : kAllTrajectoryKinds) CHECK(parse_trajectory_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_trajectory_kind("sideways"), InvalidArgument);
}

TEST_CASE("golden sequences for the high network effect") {
  const auto spec = GameSpec::integer_grid(50, 0.75);
  const auto conv = build_trajectory(spec, TrajectoryKind::kConverging, kDesignedTargets);
  CHECK(formatted(conv) == Strings{"49.99", "37.49", "47.49", "39.99", "44.99", "42.49"});
  CHECK(conv.target_counts == std::vector<int>{0, 50, 10, 40, 20, 30});
  const auto div = build_trajectory(spec, TrajectoryKind::kDiverging, kDesignedTargets);
  CHECK(formatted(div) == Strings{"42.49", "44.99", "39.99", "47.49", "37.49", "49.99"});
  auto reversed = conv.prices;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(div.prices == reversed);
}

TEST_CASE("monotone kinds order prices opposite to participation") {
  for (double beta : {0.1, 0.25, 0.5, 0.75}) {
    const auto spec = GameSpec::integer_grid(50, beta);
    const auto inc = build_trajectory(spec, TrajectoryKind::kIncreasing, kDesignedTargets);
    const auto dec = build_trajectory(spec, TrajectoryKind::kDecreasing, kDesignedTargets);
    CHECK(inc.target_counts == std::vector<int>{0, 10, 20, 30, 40, 50});
    CHECK(dec.target_counts == std::vector<int>{50, 40, 30, 20, 10, 0});
    for (std::size_t i = 1; i < inc.size(); ++i) {
      CHECK(inc.prices[i] < inc.prices[i - 1]);
      CHECK(dec.prices[i] > dec.prices[i - 1]);
    }
  }
}

TEST_CASE("low network effect prices") {
  const auto spec = GameSpec::integer_grid(50, 0.25);
  const auto dec = build_trajectory(spec, TrajectoryKind::kDecreasing, kDesignedTargets);
  CHECK(formatted(dec) == Strings{"12.49", "19.99", "27.49", "34.99", "42.49", "49.99"});
}

TEST_CASE("orderings hold for random targets") {
  testing::Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = rng.uniform_int(2, 100);
    const auto spec = GameSpec::integer_grid(k, rng.uniform(0, 0.9));
    std::vector<int> targets;
    for (int n = 0; n <= k; ++n) {
      if (rng.uniform() < 0.3) targets.push_back(n);
    }
    if (targets.empty()) targets.push_back(k / 2);
    if (targets.back() == k && spec.beta() * k < 0.01) targets.pop_back();
    if (targets.empty()) continue;
    for (TrajectoryKind kind : kAllTrajectoryKinds) {
      const auto seq = build_trajectory(spec, kind, targets);
      CHECK_NOTHROW(seq.validate(k));
      auto sorted = seq.target_counts;
      std::sort(sorted.begin(), sorted.end());
      CHECK(sorted == targets);
      for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(solve_fee(spec, seq.prices[i]).selected == seq.target_counts[i]);
      }
    }
  }
}

TEST_CASE("validation rejects broken sequences") {
  PriceSequence seq;
  seq.kind = TrajectoryKind::kIncreasing;
  CHECK_THROWS_AS(seq.validate(50), InvalidArgument);
  seq.prices = {Price(20), Price(30)};
  seq.target_counts = {40, 30};
  CHECK_THROWS_AS(seq.validate(50), InvalidArgument);
  seq.kind = TrajectoryKind::kDecreasing;
  CHECK_NOTHROW(seq.validate(50));
  seq.target_counts = {40};
  CHECK_THROWS_AS(seq.validate(50), InvalidArgument);
  seq.target_counts = {40, 60};
  CHECK_THROWS_AS(seq.validate(50), InvalidArgument);
  seq.kind = TrajectoryKind::kConverging;
  seq.target_counts = {30, 50};
  CHECK_THROWS_AS(seq.validate(50), InvalidArgument);
  seq.kind = TrajectoryKind::kDiverging;
  CHECK_NOTHROW(seq.validate(50));
  CHECK_THROWS_AS(build_trajectory(GameSpec::integer_grid(50, 0.25), TrajectoryKind::kStatic, {}),
                  InvalidArgument);
}

}  // TEST_SUITE

}  // namespace
}  // namespace feesim
