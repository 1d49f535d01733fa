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

#include <vector>

#include "doctest.h"
#include "feesim/experiment.hpp"
#include "feesim/kernels.hpp"
#include "feesim/metrics.hpp"
#include "support/oracles.hpp"

namespace feesim {
namespace {

TEST_SUITE("kernels") {

TEST_CASE("batch solve matches serial") {
  testing::Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = GameSpec::integer_grid(rng.uniform_int(1, 300), rng.uniform(0, 0.95));
    std::vector<Price> prices;
    for (int i = 0; i < 200; ++i) prices.emplace_back(rng.uniform(0, 400));
    const auto a = serial::solve_fee_batch(spec, prices);
    const auto b = par::solve_fee_batch(spec, prices);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].price == b[i].price);
      CHECK(a[i].fixed_points == b[i].fixed_points);
      CHECK(a[i].selected == b[i].selected);
      CHECK(a[i].fixed_points == solve_fee(spec, prices[i]).fixed_points);
    }
  }
}

TEST_CASE("deviation rows and sums match serial") {
  ExperimentConfig c;
  HeuristicParams hp;
  hp.trend_weight = 0.5;
  hp.dispersion = 6.0;
  c.agent = hp;
  c.seeds = {1, 2};
  const auto logs = run_factorial(c).logs;
  const auto a = serial::deviation_rows(logs);
  const auto b = par::deviation_rows(logs);
  CHECK(a.size() == 2 * 7800);
  CHECK(a == b);
  CHECK(par::sum_squares(a) == doctest::Approx(serial::sum_squares(a)).epsilon(1e-12));
  double naive = 0.0;
  for (const auto& r : a) naive += r.deviation * r.deviation;
  CHECK(serial::sum_squares(a) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("hc3 meat matches serial") {
  testing::Rng rng(2);
  const Eigen::Index n = 5000;
  const Eigen::Index p = 9;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd e(n);
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    e(i) = rng.normal();
    h(i) = rng.uniform(0, 0.5);
  }
  const auto a = serial::hc3_meat(x, e, h);
  const auto b = par::hc3_meat(x, e, h);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = e(i) * e(i) / ((1 - h(i)) * (1 - h(i)));
    ref += w * x.row(i).transpose() * x.row(i);
  }
  CHECK((a - ref).cwiseAbs().maxCoeff() < 1e-9 * ref.cwiseAbs().maxCoeff());
}

}  // TEST_SUITE

}  // namespace
}  // namespace feesim
