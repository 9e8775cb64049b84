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

#ifndef TOKBIAS_RD_HPP_
#define TOKBIAS_RD_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tokbias/outcomes.hpp"
#include "tokbias/stats.hpp"

namespace tokbias {

struct RDPoint {
  double rank = 0.0;
  bool treated = false;
  double y = 0.0;
  double weight = 1.0;  // only used by weighted fits
};

struct RDDataset {
  std::vector<RDPoint> points;
  std::size_t cutoff = 0;
  std::size_t window = 0;
  Stat stat = Stat::mean;

  // Throws InvalidArgument when a point lies outside
  // [K - window + 1, K + window] or its treatment flag disagrees with
  // rank <= K.
  void validate() const;
};

// One point per record, y = the chosen aggregate, weight = n_samples.
// Records outside the window are skipped.
RDDataset make_rd_dataset(std::span<const OutcomeRecord> records,
                          std::size_t cutoff, std::size_t window, Stat stat);

enum class StdErrorKind { classical, hc1 };

struct RDOptions {
  StdErrorKind se = StdErrorKind::classical;
  // Degree of the polynomial in r/1000 shared by both sides.
  int poly_degree = 1;
  // Weighted least squares with weights RDPoint::weight.
  bool weighted = false;
};

struct RDFit {
  double tau_hat = 0.0;
  double se_tau = 0.0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;  // per 1000 ranks
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t cutoff = 0;
  std::size_t window = 0;
  Stat stat = Stat::mean;
  RDOptions options;
  // [alpha, beta_1 .. beta_p, tau]
  std::vector<double> coefficients;

  // alpha + sum_j beta_j (r/1000)^j + tau * treated
  double predict(double rank, bool treated) const;
};

// Least squares on the regressors [1, r/1000, ..., (r/1000)^p, W]. tau_hat is
// the coefficient on W. Classical standard errors use the residual variance
// with n - (p + 2) degrees of freedom.
//
// Throws EstimationError with fewer than two points on either side, too few
// points for the residual degrees of freedom, or a rank-deficient design.
RDFit fit_rd(const RDDataset& data, const RDOptions& options = {});

struct SweepEntry {
  std::size_t window = 0;
  std::optional<RDFit> fit;
  std::string diagnostic;  // set when the window was skipped
};

// One entry per window, in input order. Each window uses the records with
// ranks in [K - w + 1, K + w]; windows violating 1 <= w < K or
// K + w > max_rank, or whose fit fails, are returned without a fit.
std::vector<SweepEntry> window_sweep(std::span<const OutcomeRecord> records,
                                     std::size_t cutoff,
                                     std::span<const std::size_t> windows,
                                     std::size_t max_rank, Stat stat,
                                     const RDOptions& options = {});

struct CurvePoint {
  double rank = 0.0;
  double value = 0.0;
};

struct LocalRegressionResult {
  std::vector<CurvePoint> treated_curve;  // ranks <= K
  std::vector<CurvePoint> control_curve;  // ranks > K
  double treated_limit = 0.0;  // treated-side fit evaluated at r = K
  double control_limit = 0.0;  // control-side fit evaluated at r = K
  double gap = 0.0;            // treated_limit - control_limit
};

// Local-linear fits on each side of the cutoff. For a target rank x0 the
// fit uses the ceil(bandwidth * n) nearest points of that side with tricube
// weights scaled by the distance of the farthest of them. Bandwidth 1 is
// the unweighted straight-line fit of the whole side. Each curve is
// evaluated at the side's own ranks.
//
// Throws InvalidArgument for bandwidth outside (0, 1] or fewer than 10
// points on a side.
LocalRegressionResult local_regression_check(const RDDataset& data,
                                             double bandwidth);

// True iff tau_hat >= log(outcome_space_size) - tolerance, where
// outcome_space_size is |V| + 1 (end-of-string included).
bool uniform_model_bound_check(const RDFit& fit,
                               std::size_t outcome_space_size,
                               double tolerance = 1e-6);

// {"cutoff", "window", "stat", "tau_hat", "se_tau", "alpha_hat",
//  "beta_hat", "n_treated", "n_control", ...} as a JSON object string.
std::string fit_report_json(const RDFit& fit);

// rank,treated,y,fitted,counterfactual. The counterfactual column is the
// fitted value under the opposite treatment (the dashed line continuing the
// control trend into the treated side, and vice versa).
std::string fitted_values_csv(const RDFit& fit, const RDDataset& data);

}  // namespace tokbias

#endif  // TOKBIAS_RD_HPP_
