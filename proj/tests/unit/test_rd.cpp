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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "tokbias/error.hpp"
#include "tokbias/rd.hpp"

using namespace tokbias;

namespace {

// Ranks 1..2k with cutoff k; y = f(r) + tau W + N(0, sigma).
template <class F>
RDDataset synth(std::size_t k, F f, double tau, double sigma,
                std::mt19937_64* rng = nullptr) {
  RDDataset d;
  d.cutoff = k;
  d.window = k;
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t r = 1; r <= 2 * k; ++r) {
    const bool w = r <= k;
    double y = f(static_cast<double>(r)) + (w ? tau : 0.0);
    if (rng) y += noise(*rng);
    d.points.push_back({static_cast<double>(r), w, y, 1.0});
  }
  return d;
}

oracle::Ols reference(const RDDataset& d) {
  std::vector<double> r, y;
  std::vector<int> w;
  for (const auto& p : d.points) {
    r.push_back(p.rank);
    w.push_back(p.treated);
    y.push_back(p.y);
  }
  return oracle::ols(r, w, y);
}

auto linear = [](double r) { return 1.0 + 0.1 * r / 1000.0; };

}  // namespace

TEST_CASE("noiseless linear data is recovered exactly") {
  const auto d = synth(1000, linear, 2.0, 0.0);
  const auto fit = fit_rd(d);
  CHECK(std::abs(fit.tau_hat - 2.0) <= 1e-9);
  CHECK(std::abs(fit.alpha_hat - 1.0) <= 1e-9);
  CHECK(std::abs(fit.beta_hat - 0.1) <= 1e-9);
  CHECK(fit.se_tau < 1e-9);
  CHECK(fit.n_treated == 1000);
  CHECK(fit.n_control == 1000);
  CHECK(fit.n_treated + fit.n_control == d.points.size());
}

TEST_CASE("constant outcomes give no discontinuity") {
  const auto d = synth(50, [](double) { return -4.0; }, 0.0, 0.0);
  CHECK(std::abs(fit_rd(d).tau_hat) < 1e-12);
}

TEST_CASE("noisy replications cover the true effect") {
  int covered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto d = synth(2000, [](double r) { return 1.0 + 0.3 * r / 1000.0; },
                         2.0, 0.5, &rng);
    const auto fit = fit_rd(d);
    covered += std::abs(fit.tau_hat - 2.0) <= 3 * fit.se_tau;
  }
  CHECK(covered >= 99);
}

TEST_CASE("normal equations, naive solver and affine shifts") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 20 + rng() % 200;
    const double a = u(rng), b = u(rng), t = u(rng);
    auto d = synth(k, [&](double r) { return a + b * r / 1000.0; }, t, 1.0, &rng);
    d.window = k;
    const auto fit = fit_rd(d);
    const auto ref = reference(d);
    CHECK(fit.alpha_hat == doctest::Approx(ref.theta[0]).epsilon(1e-10));
    CHECK(fit.beta_hat == doctest::Approx(ref.theta[1]).epsilon(1e-10));
    CHECK(fit.tau_hat == doctest::Approx(ref.theta[2]).epsilon(1e-10));
    CHECK(fit.se_tau == doctest::Approx(ref.se_tau).epsilon(1e-10));

    double g[3] = {0, 0, 0};
    for (const auto& p : d.points) {
      const double e = p.y - fit.predict(p.rank, p.treated);
      g[0] += e;
      g[1] += e * p.rank / 1000.0;
      g[2] += e * p.treated;
    }
    for (double gi : g) CHECK(std::abs(gi) <= 1e-8);

    auto shifted = d;
    for (auto& p : shifted.points) p.y += 7.5;
    const auto sf = fit_rd(shifted);
    CHECK(sf.tau_hat == doctest::Approx(fit.tau_hat).epsilon(1e-9));
    CHECK(sf.beta_hat == doctest::Approx(fit.beta_hat).epsilon(1e-9));
    CHECK(sf.alpha_hat == doctest::Approx(fit.alpha_hat + 7.5).epsilon(1e-9));
  }
}

TEST_CASE("no-jump data yields a null effect") {
  int null = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const auto d = synth(300, [](double r) { return -9.0 + 0.8 * r / 1000.0; },
                         0.0, 1.0, &rng);
    const auto fit = fit_rd(d);
    null += std::abs(fit.tau_hat) <= 3 * fit.se_tau;
  }
  CHECK(null >= 95);
}

TEST_CASE("HC1 standard errors match the sandwich formula") {
  std::mt19937_64 rng(8);
  auto d = synth(100, linear, 1.0, 1.0, &rng);
  for (auto& p : d.points) p.y += (p.rank / 100.0) * std::normal_distribution<>(0, 1)(rng);
  RDOptions o;
  o.se = StdErrorKind::hc1;
  const auto fit = fit_rd(d, o);
  const auto n = static_cast<Eigen::Index>(d.points.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd e(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = d.points[i];
    X.row(i) << 1.0, p.rank / 1000.0, p.treated ? 1.0 : 0.0;
    e(i) = p.y - fit.predict(p.rank, p.treated);
  }
  const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  const Eigen::MatrixXd meat = X.transpose() * e.cwiseAbs2().asDiagonal() * X;
  const double v = (bread * meat * bread)(2, 2) * n / (n - 3.0);
  CHECK(fit.se_tau == doctest::Approx(std::sqrt(v)).epsilon(1e-10));
  CHECK(fit.tau_hat == doctest::Approx(fit_rd(d).tau_hat).epsilon(1e-12));
}

TEST_CASE("polynomial and weighted fits") {
  const auto quad = synth(400, [](double r) {
    const double x = r / 1000.0;
    return 2.0 - x + 3.0 * x * x;
  }, -1.25, 0.0);
  RDOptions o;
  o.poly_degree = 2;
  const auto fit = fit_rd(quad, o);
  CHECK(std::abs(fit.tau_hat + 1.25) < 1e-8);
  REQUIRE(fit.coefficients.size() == 4);
  CHECK(fit.coefficients[2] == doctest::Approx(3.0).epsilon(1e-7));

  // Integer weights equal duplicated rows.
  std::mt19937_64 rng(2);
  auto d = synth(30, linear, 0.5, 1.0, &rng);
  RDDataset dup = d;
  dup.points.clear();
  for (auto& p : d.points) {
    p.weight = static_cast<double>(1 + rng() % 4);
    for (int i = 0; i < static_cast<int>(p.weight); ++i) dup.points.push_back(p);
  }
  RDOptions w;
  w.weighted = true;
  CHECK(fit_rd(d, w).tau_hat == doctest::Approx(fit_rd(dup).tau_hat).epsilon(1e-10));
}

TEST_CASE("degenerate designs are rejected") {
  RDDataset d;
  d.cutoff = 10;
  d.window = 5;
  for (int r = 6; r <= 10; ++r) d.points.push_back({double(r), true, 1.0, 1});
  CHECK_THROWS_AS(fit_rd(d), EstimationError);
  d.points.push_back({11, false, 1.0, 1});
  CHECK_THROWS_AS(fit_rd(d), EstimationError);
  d.points.push_back({12, false, 1.0, 1});
  CHECK_NOTHROW(fit_rd(d));
  // All points at one rank per side: slope and jump are not separable.
  RDDataset flat;
  flat.cutoff = 10;
  flat.window = 5;
  for (int i = 0; i < 3; ++i) {
    flat.points.push_back({10, true, 1.0, 1});
    flat.points.push_back({11, false, 1.0, 1});
  }
  CHECK_THROWS_AS(fit_rd(flat), EstimationError);
}

TEST_CASE("dataset validation") {
  RDDataset d;
  d.cutoff = 10;
  d.window = 2;
  d.points.push_back({5, true, 0, 1});
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d.points = {{11, true, 0, 1}};
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
}

namespace {

std::vector<OutcomeRecord> records_from(const RDDataset& d) {
  std::vector<OutcomeRecord> out;
  for (const auto& p : d.points) {
    OutcomeRecord r;
    r.candidate.rank = static_cast<std::size_t>(p.rank);
    r.candidate.treated = p.treated;
    r.mean = p.y;
    r.median = p.y;
    r.n_samples = 5;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("window sweep") {
  const auto d = synth(2000, linear, 2.0, 0.0);
  const auto recs = records_from(d);
  const std::vector<std::size_t> windows{100, 500, 1000, 5000};
  const auto sweep = window_sweep(recs, 2000, windows, 4000, Stat::mean);
  REQUIRE(sweep.size() == 4);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(sweep[i].fit);
    CHECK(sweep[i].window == windows[i]);
    CHECK(std::abs(sweep[i].fit->tau_hat - 2.0) <= 1e-9);
  }
  CHECK_FALSE(sweep[3].fit);
  CHECK_FALSE(sweep[3].diagnostic.empty());

  std::mt19937_64 rng(4);
  const auto noisy = records_from(synth(500, linear, 1.0, 0.3, &rng));
  const std::vector<std::size_t> one{200};
  const auto single = window_sweep(noisy, 500, one, 1000, Stat::median);
  const auto direct = fit_rd(make_rd_dataset(noisy, 500, 200, Stat::median));
  REQUIRE(single.at(0).fit);
  CHECK(single[0].fit->tau_hat == direct.tau_hat);
  CHECK(single[0].fit->se_tau == direct.se_tau);
  CHECK(single[0].fit->stat == Stat::median);
}

TEST_CASE("local regression check") {
  const auto lin = synth(200, linear, 2.0, 0.0);
  const auto ols = fit_rd(lin);
  for (double bw : {0.2, 0.5, 1.0}) {
    CHECK(std::abs(local_regression_check(lin, bw).gap - ols.tau_hat) <= 1e-6);
  }

  // Bandwidth 1 is the straight-line fit of each side.
  std::mt19937_64 rng(6);
  const auto noisy = synth(100, [](double r) { return std::sin(r / 30.0); },
                           0.7, 0.2, &rng);
  const auto full = local_regression_check(noisy, 1.0);
  for (int side = 0; side < 2; ++side) {
    std::vector<double> xs, ys;
    for (const auto& p : noisy.points) {
      if (p.treated == (side == 0)) {
        xs.push_back(p.rank);
        ys.push_back(p.y);
      }
    }
    const double mx = oracle::mean(xs), my = oracle::mean(ys);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double at_k = my + sxy / sxx * (100.0 - mx);
    CHECK((side == 0 ? full.treated_limit : full.control_limit) ==
          doctest::Approx(at_k).epsilon(1e-12));
  }
  CHECK(full.treated_curve.size() == 100);
  CHECK(full.control_curve.size() == 100);

  std::mt19937_64 qrng(2024);
  const auto quad = synth(1000, [](double r) {
    const double x = r / 1000.0;
    return -6.0 + 1.5 * x - 0.8 * x * x;
  }, 2.0, 0.1, &qrng);
  CHECK(std::abs(local_regression_check(quad, 0.3).gap - 2.0) <= 0.1);

  CHECK_THROWS_AS(local_regression_check(lin, 0.0), InvalidArgument);
  CHECK_THROWS_AS(local_regression_check(lin, 1.5), InvalidArgument);
  const auto tiny = synth(9, linear, 1.0, 0.0);
  CHECK_THROWS_AS(local_regression_check(tiny, 0.5), InvalidArgument);
}

TEST_CASE("uniform model bound") {
  const double u = std::log(1.0 / 257);
  RDDataset d;
  d.cutoff = 50;
  d.window = 50;
  for (int r = 1; r <= 100; ++r) {
    d.points.push_back({double(r), r <= 50, r <= 50 ? u : 2 * u, 1});
  }
  const auto fit = fit_rd(d);
  CHECK(std::abs(fit.tau_hat - std::log(257.0)) <= 1e-9);
  CHECK(uniform_model_bound_check(fit, 257));

  for (auto& p : d.points) {
    if (!p.treated && static_cast<int>(p.rank) % 3 == 0) p.y = 3 * u;
  }
  const auto mixed = fit_rd(d);
  CHECK(mixed.tau_hat >= std::log(257.0) - 1e-6);
  CHECK(uniform_model_bound_check(mixed, 257));

  RDFit zero;
  zero.tau_hat = 0.0;
  CHECK(uniform_model_bound_check(zero, 1));
  zero.tau_hat = 1.0;
  CHECK_FALSE(uniform_model_bound_check(zero, 257));
}

TEST_CASE("fit report and fitted values") {
  const auto d = synth(10, linear, 2.0, 0.0);
  const auto fit = fit_rd(d);
  const auto j = nlohmann::json::parse(fit_report_json(fit));
  for (const char* key : {"cutoff", "window", "stat", "tau_hat", "se_tau",
                          "alpha_hat", "beta_hat", "n_treated", "n_control"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["stat"] == "mean");
  const auto csv = fitted_values_csv(fit, d);
  CHECK(csv.rfind("rank,treated,y,fitted,counterfactual\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
  CHECK(fit.predict(3, true) - fit.predict(3, false) == doctest::Approx(2.0));
}
