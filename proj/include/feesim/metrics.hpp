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

#ifndef FEESIM_METRICS_HPP_
#define FEESIM_METRICS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "feesim/orchestrator.hpp"
#include "feesim/trajectory.hpp"

namespace feesim {

// One (agent, round) observation; the unit of the regressions.
struct DeviationRow {
  double beta = 0.0;
  TrajectoryKind path = TrajectoryKind::kStatic;
  int window = 0;
  std::string agent;
  std::uint64_t seed = 0;
  int agent_id = 0;
  double theta = 0.0;
  int round_index = 0;
  double price = 0.0;
  int y_hat = 0;
  int y_fee = 0;
  double deviation = 0.0;  // y_hat - y_fee

  friend bool operator==(const DeviationRow&, const DeviationRow&) = default;
};

// One row per (agent, round). The benchmark count is recomputed from the
// game, never read from the log. Throws SchemaError on a version mismatch
// or a failed log.
std::vector<DeviationRow> build_deviation_rows(std::span<const RunLog> logs);

// sqrt(mean of squared deviations). Throws InvalidArgument when empty.
double rmse(std::span<const DeviationRow> rows);

struct CellMetrics {
  double beta = 0.0;
  std::string path;  // trajectory kind, or "monotonic"/"non-monotonic" when pooled
  int window = 0;
  std::string agent;
  std::uint64_t seed = 0;
  std::optional<double> price;  // set for per-price static sub-cells
  int rounds = 0;               // M
  int agents = 0;               // N
  double rmse = 0.0;
  double mean_deviation = 0.0;
  double sd_deviation = 0.0;    // sample sd; 0 for a single row
};

struct MetricsOptions {
  // Also report each static price as its own one-round sub-cell.
  bool static_subcells = false;
  // Pool increasing+decreasing and converging+diverging per (beta, window).
  bool pool_directions = false;
};

std::vector<CellMetrics> cell_metrics(std::span<const DeviationRow> rows,
                                      const MetricsOptions& options = {});

// Column order:
// beta,ne,path,window,agent,seed,agent_id,theta,round,price,y_hat,y_fee,deviation
void write_deviation_csv(std::ostream& out, std::span<const DeviationRow> rows);
std::vector<DeviationRow> read_deviation_csv(std::istream& in);

void write_cell_metrics_csv(std::ostream& out, std::span<const CellMetrics> cells);
std::string format_cell_table(std::span<const CellMetrics> cells);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace feesim

#endif  // FEESIM_METRICS_HPP_
