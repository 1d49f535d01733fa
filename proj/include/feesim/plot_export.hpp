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

#ifndef FEESIM_PLOT_EXPORT_HPP_
#define FEESIM_PLOT_EXPORT_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "feesim/metrics.hpp"

namespace feesim {

// Linear-interpolation quantile (R type 7) of an ascending sample.
double quantile_sorted(std::span<const double> sorted, double q);

// Distribution of stated expectations at one price tick of one series,
// with the benchmark count for the FEE line.
struct BoxStats {
  std::string series;  // "beta=0.75/path=converging/window=3/agent=heuristic"
  double beta = 0.0;
  std::string path;
  int window = 0;
  std::string agent;
  int tick = 0;        // 0-based, ascending price
  double price = 0.0;
  int n = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
  int fee = 0;
};

// One series per (beta, path, window, agent) with one tick per distinct
// price; seeds and repeated plays of a price are pooled.
std::vector<BoxStats> box_plot_series(std::span<const DeviationRow> rows);

void write_box_plot_csv(std::ostream& out, std::span<const BoxStats> stats);

}  // namespace feesim

#endif  // FEESIM_PLOT_EXPORT_HPP_
