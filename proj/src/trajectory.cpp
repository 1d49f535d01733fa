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

#include "feesim/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace feesim {

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::kStatic: return "static";
    case TrajectoryKind::kIncreasing: return "increasing";
    case TrajectoryKind::kDecreasing: return "decreasing";
    case TrajectoryKind::kConverging: return "converging";
    case TrajectoryKind::kDiverging: return "diverging";
  }
  return "unknown";
}

TrajectoryKind parse_trajectory_kind(std::string_view text) {
  for (TrajectoryKind kind : kAllTrajectoryKinds) {
    if (to_string(kind) == text) return kind;
  }
  throw InvalidArgument(fmt::format(
      "unknown trajectory kind '{}' (expected static, increasing, decreasing, "
      "converging or diverging)",
      text));
}

namespace {

double distance_from_center(int count, int population) {
  return std::abs(count - population / 2.0);
}

}  // namespace

void PriceSequence::validate(int population) const {
  if (prices.empty()) throw InvalidArgument("price sequence is empty");
  if (prices.size() != target_counts.size()) {
    throw InvalidArgument("prices and target counts differ in length");
  }
  for (int c : target_counts) {
    if (c < 0 || c > population) {
      throw InvalidArgument(fmt::format("target count {} outside [0, {}]", c, population));
    }
  }
  const auto bad = [&](std::size_t i) {
    return InvalidArgument(fmt::format("{} sequence breaks its ordering at position {}",
                                       to_string(kind), i));
  };
  for (std::size_t i = 1; i < size(); ++i) {
    const int prev = target_counts[i - 1];
    const int cur = target_counts[i];
    switch (kind) {
      case TrajectoryKind::kStatic:
        break;
      case TrajectoryKind::kIncreasing:
        if (!(cur > prev) || !(prices[i] < prices[i - 1])) throw bad(i);
        break;
      case TrajectoryKind::kDecreasing:
        if (!(cur < prev) || !(prices[i] > prices[i - 1])) throw bad(i);
        break;
      case TrajectoryKind::kConverging:
        if (distance_from_center(cur, population) >
            distance_from_center(prev, population)) {
          throw bad(i);
        }
        break;
      case TrajectoryKind::kDiverging:
        if (distance_from_center(cur, population) <
            distance_from_center(prev, population)) {
          throw bad(i);
        }
        break;
    }
  }
}

PriceSequence build_trajectory(const GameSpec& spec, TrajectoryKind kind,
                               std::vector<int> target_counts, double offset) {
  const int k = spec.population();
  if (target_counts.empty()) throw InvalidArgument("no target counts given");

  std::sort(target_counts.begin(), target_counts.end());
  switch (kind) {
    case TrajectoryKind::kStatic:
    case TrajectoryKind::kIncreasing:
      break;
    case TrajectoryKind::kDecreasing:
      std::reverse(target_counts.begin(), target_counts.end());
      break;
    case TrajectoryKind::kConverging:
    case TrajectoryKind::kDiverging:
      std::stable_sort(target_counts.begin(), target_counts.end(), [k](int a, int b) {
        return distance_from_center(a, k) > distance_from_center(b, k);
      });
      if (kind == TrajectoryKind::kDiverging) {
        std::reverse(target_counts.begin(), target_counts.end());
      }
      break;
  }

  PriceSequence seq;
  seq.kind = kind;
  seq.prices.reserve(target_counts.size());
  for (int n : target_counts) seq.prices.push_back(make_price(spec, n, offset));
  seq.target_counts = std::move(target_counts);
  seq.validate(k);
  return seq;
}

}  // namespace feesim
