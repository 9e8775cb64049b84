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

#include "tokbias/rd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "tokbias/error.hpp"

namespace tokbias {

void RDDataset::validate() const {
  // Ranks start at 1, so K - window + 1 >= 1 needs window <= K.
  if (window == 0 || window > cutoff) {
    throw InvalidArgument("window must satisfy 1 <= window <= K");
  }
  const double lo = static_cast<double>(cutoff - window + 1);
  const double hi = static_cast<double>(cutoff + window);
  for (const auto& p : points) {
    if (p.rank < lo || p.rank > hi) {
      throw InvalidArgument("rank " + std::to_string(p.rank) +
                            " lies outside the window");
    }
    if (p.treated != (p.rank <= static_cast<double>(cutoff))) {
      throw InvalidArgument("treatment flag of rank " +
                            std::to_string(p.rank) +
                            " disagrees with the cutoff");
    }
  }
}

RDDataset make_rd_dataset(std::span<const OutcomeRecord> records,
                          std::size_t cutoff, std::size_t window, Stat stat) {
  RDDataset data;
  data.cutoff = cutoff;
  data.window = window;
  data.stat = stat;
  for (const auto& r : records) {
    const std::size_t rank = r.candidate.rank;
    if (rank + window < cutoff + 1 || rank > cutoff + window) continue;
    data.points.push_back({static_cast<double>(rank), r.candidate.treated,
                           r.value(stat), static_cast<double>(r.n_samples)});
  }
  data.validate();
  return data;
}

double RDFit::predict(double rank, bool treated) const {
  const double x = rank / 1000.0;
  double y = coefficients.front();
  double xp = 1.0;
  for (std::size_t j = 1; j + 1 < coefficients.size(); ++j) {
    xp *= x;
    y += coefficients[j] * xp;
  }
  return y + (treated ? coefficients.back() : 0.0);
}

RDFit fit_rd(const RDDataset& data, const RDOptions& options) {
  if (options.poly_degree < 1) {
    throw InvalidArgument("polynomial degree must be at least 1");
  }
  RDFit fit;
  fit.cutoff = data.cutoff;
  fit.window = data.window;
  fit.stat = data.stat;
  fit.options = options;
  for (const auto& p : data.points) (p.treated ? fit.n_treated : fit.n_control)++;
  if (fit.n_treated < 2 || fit.n_control < 2) {
    throw EstimationError("need at least two treated and two control points (" +
                          std::to_string(fit.n_treated) + " treated, " +
                          std::to_string(fit.n_control) + " control)");
  }
  const auto n = static_cast<Eigen::Index>(data.points.size());
  const Eigen::Index k = options.poly_degree + 2;
  if (n <= k) {
    throw EstimationError("not enough points for " + std::to_string(k) +
                          " coefficients");
  }

  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = data.points[static_cast<std::size_t>(i)];
    if (options.weighted && !(p.weight > 0.0)) {
      throw EstimationError("weights must be positive");
    }
    const double s = options.weighted ? std::sqrt(p.weight) : 1.0;
    const double x = p.rank / 1000.0;
    double xp = 1.0;
    for (Eigen::Index j = 0; j <= options.poly_degree; ++j) {
      X(i, j) = s * xp;
      xp *= x;
    }
    X(i, k - 1) = s * (p.treated ? 1.0 : 0.0);
    y(i) = s * p.y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < k) throw EstimationError("design matrix is rank deficient");
  const Eigen::VectorXd theta = qr.solve(y);
  const Eigen::VectorXd resid = y - X * theta;
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const double dof = static_cast<double>(n - k);

  Eigen::MatrixXd cov;
  if (options.se == StdErrorKind::classical) {
    cov = xtx_inv * (resid.squaredNorm() / dof);
  } else {
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      meat += resid(i) * resid(i) * X.row(i).transpose() * X.row(i);
    }
    cov = xtx_inv * meat * xtx_inv * (static_cast<double>(n) / dof);
  }

  fit.coefficients.assign(theta.data(), theta.data() + k);
  fit.alpha_hat = theta(0);
  fit.beta_hat = theta(1);
  fit.tau_hat = theta(k - 1);
  fit.se_tau = std::sqrt(std::max(0.0, cov(k - 1, k - 1)));
  return fit;
}

std::vector<SweepEntry> window_sweep(std::span<const OutcomeRecord> records,
                                     std::size_t cutoff,
                                     std::span<const std::size_t> windows,
                                     std::size_t max_rank, Stat stat,
                                     const RDOptions& options) {
  std::vector<SweepEntry> out;
  for (std::size_t w : windows) {
    SweepEntry entry;
    entry.window = w;
    if (w == 0 || w >= cutoff || cutoff + w > max_rank) {
      entry.diagnostic = "window " + std::to_string(w) +
                         " is infeasible for K = " + std::to_string(cutoff) +
                         " and " + std::to_string(max_rank) + " merges";
    } else {
      try {
        entry.fit = fit_rd(make_rd_dataset(records, cutoff, w, stat), options);
      } catch (const Error& e) {
        entry.diagnostic = e.what();
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

namespace {

// Weighted straight-line fit evaluated at x0.
double local_linear(std::span<const double> xs, std::span<const double> ys,
                    std::span<const double> ws, double x0) {
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("local fit has no spread in rank");
  return my + sxy / sxx * (x0 - mx);
}

double side_fit(std::span<const double> xs, std::span<const double> ys,
                double bandwidth, double x0) {
  const std::size_t n = xs.size();
  std::vector<double> ws(n, 1.0);
  if (bandwidth < 1.0) {
    const auto q = std::max<std::size_t>(
        3, static_cast<std::size_t>(std::ceil(bandwidth * n)));
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(xs[i] - x0);
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + (q - 1), sorted.end());
    const double h = sorted[q - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = h > 0.0 ? dist[i] / h : (dist[i] == 0.0 ? 0.0 : 1.0);
      ws[i] = u < 1.0 ? std::pow(1.0 - u * u * u, 3) : 0.0;
    }
  }
  return local_linear(xs, ys, ws, x0);
}

}  // namespace

LocalRegressionResult local_regression_check(const RDDataset& data,
                                             double bandwidth) {
  if (!(bandwidth > 0.0 && bandwidth <= 1.0)) {
    throw InvalidArgument("bandwidth must lie in (0, 1]");
  }
  std::vector<RDPoint> pts = data.points;
  std::sort(pts.begin(), pts.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.rank < b.rank; });
  std::vector<double> tx, ty, cx, cy;
  for (const auto& p : pts) {
    (p.treated ? tx : cx).push_back(p.rank);
    (p.treated ? ty : cy).push_back(p.y);
  }
  if (tx.size() < 10 || cx.size() < 10) {
    throw InvalidArgument("local regression needs at least 10 points per side");
  }
  LocalRegressionResult out;
  const double k = static_cast<double>(data.cutoff);
  for (double x : tx) out.treated_curve.push_back({x, side_fit(tx, ty, bandwidth, x)});
  for (double x : cx) out.control_curve.push_back({x, side_fit(cx, cy, bandwidth, x)});
  out.treated_limit = side_fit(tx, ty, bandwidth, k);
  out.control_limit = side_fit(cx, cy, bandwidth, k);
  out.gap = out.treated_limit - out.control_limit;
  return out;
}

bool uniform_model_bound_check(const RDFit& fit,
                               std::size_t outcome_space_size,
                               double tolerance) {
  if (outcome_space_size == 0) {
    throw InvalidArgument("outcome space must not be empty");
  }
  return fit.tau_hat >=
         std::log(static_cast<double>(outcome_space_size)) - tolerance;
}

std::string fit_report_json(const RDFit& fit) {
  nlohmann::ordered_json j;
  j["cutoff"] = fit.cutoff;
  j["window"] = fit.window;
  j["stat"] = std::string(to_string(fit.stat));
  j["tau_hat"] = fit.tau_hat;
  j["se_tau"] = fit.se_tau;
  j["alpha_hat"] = fit.alpha_hat;
  j["beta_hat"] = fit.beta_hat;
  j["n_treated"] = fit.n_treated;
  j["n_control"] = fit.n_control;
  j["se_kind"] = fit.options.se == StdErrorKind::classical ? "classical" : "hc1";
  j["poly_degree"] = fit.options.poly_degree;
  j["weighted"] = fit.options.weighted;
  j["coefficients"] = fit.coefficients;
  return j.dump(2) + "\n";
}

std::string fitted_values_csv(const RDFit& fit, const RDDataset& data) {
  std::vector<RDPoint> pts = data.points;
  std::sort(pts.begin(), pts.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.rank < b.rank; });
  std::string out = "rank,treated,y,fitted,counterfactual\n";
  char buf[160];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.0f,%d,%.17g,%.17g,%.17g\n", p.rank,
                  p.treated ? 1 : 0, p.y, fit.predict(p.rank, p.treated),
                  fit.predict(p.rank, !p.treated));
    out += buf;
  }
  return out;
}

}  // namespace tokbias
