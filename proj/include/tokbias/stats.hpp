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

#ifndef TOKBIAS_STATS_HPP_
#define TOKBIAS_STATS_HPP_

#include <span>
#include <string_view>

namespace tokbias {

enum class Stat { mean, std, median, iqr };

std::string_view to_string(Stat stat);
// Accepts "mean", "std", "median", "iqr".
Stat parse_stat(std::string_view name);

// Throws InvalidArgument on empty input.
//   std     population standard deviation (divisor n)
//   median  average of the two middle values for even n
//   iqr     Q3 - Q1, quantiles by linear interpolation between order
//           statistics at h = (n - 1) p
double aggregate(std::span<const double> samples, Stat stat);

// Linear-interpolation quantile, p in [0, 1], on already sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace tokbias

#endif  // TOKBIAS_STATS_HPP_
