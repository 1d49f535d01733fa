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

#ifndef FEESIM_STATS_HPP_
#define FEESIM_STATS_HPP_

#include <span>

namespace feesim {

// Yeo-Johnson power transform. The log branches are taken when lambda is
// within 1e-8 of 0 (y >= 0) or of 2 (y < 0).
double yeo_johnson(double y, double lambda);

// Inverse of yeo_johnson. Throws InvalidArgument when x is outside the
// image of the transform for this lambda.
double yeo_johnson_inverse(double x, double lambda);

// Gaussian profile log-likelihood of lambda, up to a constant.
double yeo_johnson_log_likelihood(std::span<const double> values, double lambda);

inline constexpr double kLambdaLower = -5.0;
inline constexpr double kLambdaUpper = 5.0;

// Maximizes the profile log-likelihood over [-5, 5]: a coarse grid picks
// the bracket, golden-section search narrows it below 1e-6. Needs at least
// three distinct values.
double fit_lambda(std::span<const double> values);

}  // namespace feesim

#endif  // FEESIM_STATS_HPP_
