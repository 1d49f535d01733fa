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

#ifndef FEESIM_KERNELS_HPP_
#define FEESIM_KERNELS_HPP_

// Data-parallel inner loops. Each kernel has an OpenMP version in
// feesim::par and a plain loop in feesim::serial; the serial ones are the
// reference the tests and the benchmark compare against.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "feesim/game.hpp"

namespace feesim {

struct DeviationRow;
struct RunLog;

namespace serial {

std::vector<EquilibriumSolution> solve_fee_batch(const GameSpec& spec, std::span<const Price> prices);
// Sum of squared deviations.
double sum_squares(std::span<const DeviationRow> rows);
// Rows for each log, concatenated in log order.
std::vector<DeviationRow> deviation_rows(std::span<const RunLog> logs);
// X^T diag(e_i^2 / (1 - h_ii)^2) X
Eigen::MatrixXd hc3_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& leverage);

}  // namespace serial

namespace par {

std::vector<EquilibriumSolution> solve_fee_batch(const GameSpec& spec, std::span<const Price> prices);
double sum_squares(std::span<const DeviationRow> rows);
std::vector<DeviationRow> deviation_rows(std::span<const RunLog> logs);
Eigen::MatrixXd hc3_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& leverage);

}  // namespace par

}  // namespace feesim

#endif  // FEESIM_KERNELS_HPP_
