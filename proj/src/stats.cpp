// Copyright 2026 The tokbias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tokbias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tokbias/error.hpp"

namespace tokbias {

std::string_view to_string(Stat stat) {
  switch (stat) {
    case Stat::mean: return "mean";
    case Stat::std: return "std";
    case Stat::median: return "median";
    case Stat::iqr: return "iqr";
  }
  return "unknown";
}

Stat parse_stat(std::string_view name) {
  if (name == "mean") return Stat::mean;
  if (name == "std") return Stat::std;
  if (name == "median") return Stat::median;
  if (name == "iqr") return Stat::iqr;
  throw InvalidArgument("unknown statistic '" + std::string(name) +
                        "' (expected mean, std, median or iqr)");
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double aggregate(std::span<const double> samples, Stat stat) {
  if (samples.empty()) throw InvalidArgument("cannot aggregate an empty sample");
  const double n = static_cast<double>(samples.size());
  if (stat == Stat::mean || stat == Stat::std) {
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    if (stat == Stat::mean) return mean;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / n);
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (stat == Stat::median) return quantile_sorted(sorted, 0.5);
  return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

}  // namespace tokbias
