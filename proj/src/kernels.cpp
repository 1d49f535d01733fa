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

#include "feesim/kernels.hpp"

#include <exception>
#include <map>

#include <fmt/format.h>
#include <omp.h>

#include "feesim/metrics.hpp"
#include "feesim/orchestrator.hpp"

namespace feesim {

namespace {

std::vector<DeviationRow> rows_for_log(const RunLog& log) {
  if (log.schema_version != kRunLogSchemaVersion) {
    throw SchemaError(fmt::format("run log schema version {} (expected {})", log.schema_version,
                                  kRunLogSchemaVersion));
  }
  if (!log.ok()) {
    throw SchemaError(fmt::format("run log {} is a failed run: {}", log.cell.key(), *log.failure));
  }
  const GameSpec spec = log.spec();
  const std::string agent(agent_label(log.cell.agent));
  std::map<double, int> benchmark;

  std::vector<DeviationRow> rows;
  rows.reserve(log.rounds.size() * log.types.size());
  for (const auto& r : log.rounds) {
    auto [it, fresh] = benchmark.try_emplace(r.price.value(), 0);
    if (fresh) it->second = solve_fee(spec, r.price).selected;
    for (const auto& a : r.agents) {
      DeviationRow row;
      row.beta = log.cell.beta;
      row.path = log.cell.trajectory.kind;
      row.window = log.cell.window_length;
      row.agent = agent;
      row.seed = log.cell.seed;
      row.agent_id = a.agent_id;
      row.theta = a.theta;
      row.round_index = r.round_index;
      row.price = r.price.value();
      row.y_hat = a.decision.expected_total;
      row.y_fee = it->second;
      row.deviation = static_cast<double>(row.y_hat - row.y_fee);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Per-thread partials combined in thread order, so results depend only on
// the thread count.
template <class T, class Body>
std::vector<T> static_partials(long n, const T& zero, Body body) {
  std::vector<T> partials;
#pragma omp parallel
  {
#pragma omp single
    partials.assign(static_cast<std::size_t>(omp_get_num_threads()), zero);
    T& mine = partials[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) body(mine, i);
  }
  return partials;
}

}  // namespace

namespace serial {

std::vector<EquilibriumSolution> solve_fee_batch(const GameSpec& spec,
                                                 std::span<const Price> prices) {
  std::vector<EquilibriumSolution> out;
  out.reserve(prices.size());
  for (Price p : prices) out.push_back(solve_fee(spec, p));
  return out;
}

double sum_squares(std::span<const DeviationRow> rows) {
  double total = 0.0;
  for (const auto& r : rows) total += r.deviation * r.deviation;
  return total;
}

std::vector<DeviationRow> deviation_rows(std::span<const RunLog> logs) {
  std::vector<DeviationRow> out;
  for (const auto& log : logs) {
    auto rows = rows_for_log(log);
    out.insert(out.end(), std::make_move_iterator(rows.begin()),
               std::make_move_iterator(rows.end()));
  }
  return out;
}

Eigen::MatrixXd hc3_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& leverage) {
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double w = residuals(i) * residuals(i) / ((1.0 - leverage(i)) * (1.0 - leverage(i)));
    meat.noalias() += w * x.row(i).transpose() * x.row(i);
  }
  return meat;
}

}  // namespace serial

namespace par {

std::vector<EquilibriumSolution> solve_fee_batch(const GameSpec& spec,
                                                 std::span<const Price> prices) {
  std::vector<EquilibriumSolution> out(prices.size());
  const long n = static_cast<long>(prices.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = solve_fee(spec, prices[static_cast<std::size_t>(i)]);
  }
  return out;
}

double sum_squares(std::span<const DeviationRow> rows) {
  const auto partials = static_partials<double>(
      static_cast<long>(rows.size()), 0.0, [&](double& acc, long i) {
        const double d = rows[static_cast<std::size_t>(i)].deviation;
        acc += d * d;
      });
  double total = 0.0;
  for (double p : partials) total += p;
  return total;
}

std::vector<DeviationRow> deviation_rows(std::span<const RunLog> logs) {
  std::vector<std::vector<DeviationRow>> per_log(logs.size());
  std::exception_ptr failure;
  const long n = static_cast<long>(logs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      per_log[static_cast<std::size_t>(i)] = rows_for_log(logs[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(feesim_deviation_rows)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t total = 0;
  for (const auto& rows : per_log) total += rows.size();
  std::vector<DeviationRow> out;
  out.reserve(total);
  for (auto& rows : per_log) {
    out.insert(out.end(), std::make_move_iterator(rows.begin()),
               std::make_move_iterator(rows.end()));
  }
  return out;
}

Eigen::MatrixXd hc3_meat(const Eigen::MatrixXd& x, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& leverage) {
  const Eigen::Index p = x.cols();
  const auto partials = static_partials<Eigen::MatrixXd>(
      static_cast<long>(x.rows()), Eigen::MatrixXd::Zero(p, p),
      [&](Eigen::MatrixXd& acc, long i) {
        const double one_minus_h = 1.0 - leverage(i);
        const double w = residuals(i) * residuals(i) / (one_minus_h * one_minus_h);
        acc.noalias() += w * x.row(i).transpose() * x.row(i);
      });
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (const auto& part : partials) meat += part;
  return meat;
}

}  // namespace par

}  // namespace feesim
