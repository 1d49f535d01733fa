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

#include "feesim/plot_export.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

namespace feesim {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level outside [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<BoxStats> box_plot_series(std::span<const DeviationRow> rows) {
  using SeriesKey = std::tuple<double, TrajectoryKind, int, std::string>;
  std::map<SeriesKey, std::map<double, std::vector<const DeviationRow*>>> groups;
  for (const auto& r : rows) groups[{r.beta, r.path, r.window, r.agent}][r.price].push_back(&r);

  std::vector<BoxStats> out;
  for (const auto& [key, ticks] : groups) {
    const auto& [beta, path, window, agent] = key;
    int tick = 0;
    for (const auto& [price, members] : ticks) {
      std::vector<double> ys;
      ys.reserve(members.size());
      for (const auto* r : members) ys.push_back(r->y_hat);
      std::sort(ys.begin(), ys.end());

      BoxStats b;
      b.beta = beta;
      b.path = std::string(to_string(path));
      b.window = window;
      b.agent = agent;
      b.series = fmt::format("beta={}/path={}/window={}/agent={}", format_double(beta), b.path,
                             window, agent);
      b.tick = tick++;
      b.price = price;
      b.n = static_cast<int>(ys.size());
      b.min = ys.front();
      b.q1 = quantile_sorted(ys, 0.25);
      b.median = quantile_sorted(ys, 0.5);
      b.q3 = quantile_sorted(ys, 0.75);
      b.max = ys.back();
      b.mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
      b.fee = members.front()->y_fee;
      out.push_back(std::move(b));
    }
  }
  return out;
}

void write_box_plot_csv(std::ostream& out, std::span<const BoxStats> stats) {
  out << "series,beta,path,window,agent,tick,price,n,min,q1,median,q3,max,mean,fee\n";
  for (const auto& b : stats) {
    out << b.series << ',' << format_double(b.beta) << ',' << b.path << ',' << b.window << ','
        << b.agent << ',' << b.tick << ',' << fmt::format("{:.2f}", b.price) << ',' << b.n << ','
        << format_double(b.min) << ',' << format_double(b.q1) << ',' << format_double(b.median)
        << ',' << format_double(b.q3) << ',' << format_double(b.max) << ','
        << format_double(b.mean) << ',' << b.fee << '\n';
  }
}

}  // namespace feesim
