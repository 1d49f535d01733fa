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

#include "feesim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <fmt/format.h>

#include "feesim/errors.hpp"

namespace feesim {

namespace {
constexpr double kBranchEps = 1e-8;
}

double yeo_johnson(double y, double lambda) {
  if (y >= 0.0) {
    if (std::abs(lambda) < kBranchEps) return std::log1p(y);
    return std::expm1(lambda * std::log1p(y)) / lambda;
  }
  const double mirrored = 2.0 - lambda;
  if (std::abs(mirrored) < kBranchEps) return -std::log1p(-y);
  return -std::expm1(mirrored * std::log1p(-y)) / mirrored;
}

double yeo_johnson_inverse(double x, double lambda) {
  if (x >= 0.0) {
    if (std::abs(lambda) < kBranchEps) return std::expm1(x);
    const double base = lambda * x;
    if (!(base > -1.0)) {
      throw InvalidArgument(fmt::format("{} is outside the Yeo-Johnson image for lambda {}", x, lambda));
    }
    return std::expm1(std::log1p(base) / lambda);
  }
  const double mirrored = 2.0 - lambda;
  if (std::abs(mirrored) < kBranchEps) return -std::expm1(-x);
  const double base = -mirrored * x;
  if (!(base > -1.0)) {
    throw InvalidArgument(fmt::format("{} is outside the Yeo-Johnson image for lambda {}", x, lambda));
  }
  return -std::expm1(std::log1p(base) / mirrored);
}

double yeo_johnson_log_likelihood(std::span<const double> values, double lambda) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  double jacobian = 0.0;
  std::vector<double> t(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    t[i] = yeo_johnson(values[i], lambda);
    mean += t[i];
    jacobian += std::copysign(std::log1p(std::abs(values[i])), values[i]);
  }
  mean /= n;
  double ss = 0.0;
  for (double v : t) ss += (v - mean) * (v - mean);
  const double variance = ss / n;
  if (!(variance > 0.0) || !std::isfinite(variance)) return -INFINITY;
  return -0.5 * n * std::log(variance) + (lambda - 1.0) * jacobian;
}

double fit_lambda(std::span<const double> values) {
  const std::set<double> distinct(values.begin(), values.end());
  if (distinct.size() < 3) {
    throw InvalidArgument(fmt::format(
        "fitting lambda needs at least 3 distinct values, got {}", distinct.size()));
  }
  auto ll = [&](double lambda) { return yeo_johnson_log_likelihood(values, lambda); };

  constexpr int kGrid = 100;
  constexpr double kStep = (kLambdaUpper - kLambdaLower) / kGrid;
  int best = 0;
  double best_ll = -INFINITY;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = ll(kLambdaLower + i * kStep);
    if (v > best_ll) {
      best_ll = v;
      best = i;
    }
  }
  double a = kLambdaLower + std::max(best - 1, 0) * kStep;
  double b = kLambdaLower + std::min(best + 1, kGrid) * kStep;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = ll(c);
  double fd = ll(d);
  while (b - a > 1e-6) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = ll(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = ll(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace feesim
