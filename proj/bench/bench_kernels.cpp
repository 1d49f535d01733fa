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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "feesim/experiment.hpp"
#include "feesim/kernels.hpp"
#include "feesim/metrics.hpp"

namespace {

using feesim::DeviationRow;
using feesim::GameSpec;
using feesim::Price;

std::vector<Price> random_prices(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 120.0);
  std::vector<Price> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(u(rng));
  return out;
}

std::vector<DeviationRow> random_rows(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> y(0, 50);
  std::vector<DeviationRow> rows(n);
  for (auto& r : rows) {
    r.y_hat = y(rng);
    r.y_fee = y(rng);
    r.deviation = r.y_hat - r.y_fee;
  }
  return rows;
}

const std::vector<feesim::RunLog>& factorial_logs() {
  static const std::vector<feesim::RunLog> logs = [] {
    feesim::ExperimentConfig cfg = feesim::paper_profile();
    cfg.seeds = {1, 2, 3, 4};
    return feesim::run_factorial(cfg).logs;
  }();
  return logs;
}

template <auto Fn>
void BM_SolveBatch(benchmark::State& state) {
  const GameSpec spec = GameSpec::integer_grid(static_cast<int>(state.range(0)), 0.5);
  const auto prices = random_prices(2000);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(spec, prices));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(prices.size()));
}

template <auto Fn>
void BM_SumSquares(benchmark::State& state) {
  const auto rows = random_rows(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(rows));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_DeviationRows(benchmark::State& state) {
  const auto& logs = factorial_logs();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(logs));
}

template <auto Fn>
void BM_Hc3Meat(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, 13);
  const Eigen::VectorXd e = Eigen::VectorXd::Random(n);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(n, 13.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, e, h));
}

BENCHMARK(BM_SolveBatch<feesim::serial::solve_fee_batch>)->Name("solve_fee_batch/serial")->Arg(50)->Arg(500);
BENCHMARK(BM_SolveBatch<feesim::par::solve_fee_batch>)->Name("solve_fee_batch/par")->Arg(50)->Arg(500);
BENCHMARK(BM_SumSquares<feesim::serial::sum_squares>)->Name("sum_squares/serial")->Arg(7800)->Arg(1 << 20);
BENCHMARK(BM_SumSquares<feesim::par::sum_squares>)->Name("sum_squares/par")->Arg(7800)->Arg(1 << 20);
BENCHMARK(BM_DeviationRows<feesim::serial::deviation_rows>)->Name("deviation_rows/serial");
BENCHMARK(BM_DeviationRows<feesim::par::deviation_rows>)->Name("deviation_rows/par");
BENCHMARK(BM_Hc3Meat<feesim::serial::hc3_meat>)->Name("hc3_meat/serial")->Arg(7800)->Arg(62400);
BENCHMARK(BM_Hc3Meat<feesim::par::hc3_meat>)->Name("hc3_meat/par")->Arg(7800)->Arg(62400);

}  // namespace

BENCHMARK_MAIN();
