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

#ifndef FEESIM_TRAJECTORY_HPP_
#define FEESIM_TRAJECTORY_HPP_

#include <array>
#include <string_view>
#include <vector>

#include "feesim/game.hpp"

namespace feesim {

// Kinds are named by what participation does along the sequence:
// kIncreasing means prices fall.
enum class TrajectoryKind { kStatic, kIncreasing, kDecreasing, kConverging, kDiverging };

inline constexpr std::array<TrajectoryKind, 5> kAllTrajectoryKinds = {
    TrajectoryKind::kStatic, TrajectoryKind::kIncreasing,
    TrajectoryKind::kDecreasing, TrajectoryKind::kConverging,
    TrajectoryKind::kDiverging};

inline constexpr std::array<TrajectoryKind, 4> kDynamicTrajectoryKinds = {
    TrajectoryKind::kIncreasing, TrajectoryKind::kDecreasing,
    TrajectoryKind::kConverging, TrajectoryKind::kDiverging};

std::string_view to_string(TrajectoryKind kind);
TrajectoryKind parse_trajectory_kind(std::string_view text);

// The six designed equilibrium counts for a 50-agent population.
inline const std::vector<int> kDesignedTargets = {0, 10, 20, 30, 40, 50};

struct PriceSequence {
  TrajectoryKind kind = TrajectoryKind::kStatic;
  std::vector<Price> prices;
  std::vector<int> target_counts;

  std::size_t size() const { return prices.size(); }

  // Throws InvalidArgument when the ordering breaks the kind's invariant.
  void validate(int population) const;
};

// Orders the designed prices for `kind`. Converging puts the counts
// farthest from K/2 first (lower count first on ties); Diverging is its
// reverse. Static keeps ascending counts; the orchestrator plays each
// price as its own single-round game.
PriceSequence build_trajectory(const GameSpec& spec, TrajectoryKind kind,
                               std::vector<int> target_counts,
                               double offset = kDefaultPriceOffset);

}  // namespace feesim

#endif  // FEESIM_TRAJECTORY_HPP_
